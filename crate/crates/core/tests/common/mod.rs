//! Oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

pub mod micro;

use std::collections::HashSet;
use std::path::Path;

use cctm::corpus::Corpus;
use cctm::synthetic::PlantedConfig;

/// Writes a corpus in the JSONL input format with pre-tokenized documents.
pub fn write_jsonl(corpus: &Corpus, path: &Path) {
    let mut lines = String::new();
    for doc in corpus.documents() {
        let tokens: Vec<&str> = doc.tokens.iter().map(|&t| corpus.vocabulary().word(t)).collect();
        let rec = serde_json::json!({
            "id": doc.id,
            "collection": corpus.collections()[doc.collection],
            "tokens": tokens,
        });
        lines.push_str(&rec.to_string());
        lines.push('\n');
    }
    std::fs::write(path, lines).unwrap();
}

/// C_V by explicit enumeration of every sliding window as a word set.
pub fn brute_force_cv(words: &[&str], reference: &Corpus, window: usize, epsilon: f64) -> f64 {
    let vocab = reference.vocabulary();
    let mut windows: Vec<HashSet<&str>> = Vec::new();
    for doc in reference.documents() {
        let tokens: Vec<&str> = doc.tokens.iter().map(|&t| vocab.word(t)).collect();
        let count = if tokens.len() > window { tokens.len() - window + 1 } else { 1 };
        for start in 0..count {
            let end = (start + window).min(tokens.len());
            windows.push(tokens[start..end].iter().copied().collect());
        }
    }
    let n = windows.len() as f64;
    let p = |w: &str| windows.iter().filter(|s| s.contains(w)).count() as f64 / n;
    let pj = |a: &str, b: &str| windows.iter().filter(|s| s.contains(a) && s.contains(b)).count() as f64 / n;

    let k = words.len();
    let mut v = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let (pi, pjj) = (p(words[i]), p(words[j]));
            if pi == 0.0 || pjj == 0.0 {
                continue;
            }
            let pij = pj(words[i], words[j]) + epsilon;
            v[i][j] = if -pij.ln() <= 0.0 {
                1.0
            } else {
                (pij / (pi * pjj)).ln() / -pij.ln()
            };
        }
    }
    let total: Vec<f64> = (0..k).map(|j| (0..k).map(|i| v[i][j]).sum()).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut score = 0.0;
    for row in &v {
        let (a, b) = (norm(row), norm(&total));
        if a > 0.0 && b > 0.0 {
            score += row.iter().zip(&total).map(|(x, y)| x * y).sum::<f64>() / (a * b);
        }
    }
    score / k as f64
}

/// Planted benchmark: 2 collections, 5 topics, 20% specific vocabulary,
/// 1,000 documents of 100 tokens.
pub fn benchmark_config(seed: u64) -> PlantedConfig {
    PlantedConfig {
        specific_token_share: 0.03,
        leakage: 0.2,
        word_concentration: 10.0,
        seed,
        ..PlantedConfig::default()
    }
}
