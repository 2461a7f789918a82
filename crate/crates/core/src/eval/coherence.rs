//! C_V coherence over boolean sliding windows.
//!
//! Every document of the reference corpus yields `max(1, len - width + 1)`
//! virtual documents (windows). For each word of the set, the windows that
//! contain it are stored as merged intervals of global window ids, so single
//! and pair counts are interval lengths and interval intersections.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{top_word_ids, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceParams {
    pub window: usize,
    pub epsilon: f64,
}

impl Default for CoherenceParams {
    fn default() -> Self {
        Self {
            window: 110,
            epsilon: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScore {
    pub score: f64,
    /// Cosine of each word's NPMI vector with the set's sum vector.
    pub per_word: Vec<f64>,
    /// Words with no occurrence in the reference corpus.
    pub missing: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct WindowIndex {
    total_windows: u64,
    intervals: HashMap<String, Vec<(u64, u64)>>,
}

impl WindowIndex {
    /// Indexes the windows of `reference` containing each of `words`.
    pub fn build<'a>(reference: &Corpus, window: usize, words: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidArgument("window width must be at least 1".into()));
        }
        let mut wanted: HashMap<u32, String> = HashMap::new();
        for w in words {
            if let Some(id) = reference.vocabulary().id(w) {
                wanted.insert(id, w.to_owned());
            }
        }
        let mut intervals: HashMap<String, Vec<(u64, u64)>> = HashMap::new();
        let mut base = 0u64;
        for doc in reference.documents() {
            let len = doc.tokens.len();
            let windows = len.saturating_sub(window) + 1;
            for (p, t) in doc.tokens.iter().enumerate() {
                let Some(word) = wanted.get(t) else { continue };
                let first = p.saturating_sub(window - 1) as u64 + base;
                let last = p.min(windows - 1) as u64 + base + 1;
                let list = intervals.entry(word.clone()).or_default();
                match list.last_mut() {
                    Some(prev) if prev.1 >= first => prev.1 = prev.1.max(last),
                    _ => list.push((first, last)),
                }
            }
            base += windows as u64;
        }
        Ok(Self {
            total_windows: base,
            intervals,
        })
    }

    pub fn total_windows(&self) -> u64 {
        self.total_windows
    }

    /// Number of windows containing `word`.
    pub fn count(&self, word: &str) -> u64 {
        self.intervals.get(word).map_or(0, |l| l.iter().map(|(a, b)| b - a).sum())
    }

    /// Number of windows containing both words.
    pub fn joint(&self, a: &str, b: &str) -> u64 {
        let (Some(x), Some(y)) = (self.intervals.get(a), self.intervals.get(b)) else {
            return 0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            let lo = x[i].0.max(y[j].0);
            let hi = x[i].1.min(y[j].1);
            if lo < hi {
                n += hi - lo;
            }
            if x[i].1 < y[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        n
    }

    /// Normalized PMI of a word pair. Zero when either word never occurs.
    pub fn npmi(&self, a: &str, b: &str, epsilon: f64) -> f64 {
        let n = self.total_windows as f64;
        let pa = self.count(a) as f64 / n;
        let pb = self.count(b) as f64 / n;
        if pa == 0.0 || pb == 0.0 {
            return 0.0;
        }
        let pab = self.joint(a, b) as f64 / n + epsilon;
        let denom = -pab.ln();
        if denom <= 0.0 {
            return 1.0;
        }
        (pab / (pa * pb)).ln() / denom
    }

    /// C_V of a word set with one-all segmentation.
    pub fn coherence(&self, words: &[&str], epsilon: f64) -> Result<CoherenceScore> {
        let mut seen = HashSet::new();
        let words: Vec<&str> = words.iter().copied().filter(|w| seen.insert(*w)).collect();
        if words.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "coherence needs at least 2 distinct words, got {}",
                words.len()
            )));
        }
        let present: Vec<bool> = words.iter().map(|w| self.count(w) > 0).collect();
        let n = words.len();
        let mut vectors = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if present[i] && present[j] {
                    vectors[i * n + j] = self.npmi(words[i], words[j], epsilon);
                }
            }
        }
        let mut total = vec![0.0; n];
        for row in vectors.chunks(n) {
            for (t, v) in total.iter_mut().zip(row) {
                *t += v;
            }
        }
        let total_norm = total.iter().map(|v| v * v).sum::<f64>().sqrt();
        let per_word: Vec<f64> = vectors
            .chunks(n)
            .map(|row| {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 || total_norm == 0.0 {
                    0.0
                } else {
                    row.iter().zip(&total).map(|(a, b)| a * b).sum::<f64>() / (norm * total_norm)
                }
            })
            .collect();
        let score = per_word.iter().sum::<f64>() / n as f64;
        let missing = words
            .iter()
            .zip(&present)
            .filter(|(_, &p)| !p)
            .map(|(w, _)| (*w).to_owned())
            .collect();
        Ok(CoherenceScore {
            score,
            per_word,
            missing,
        })
    }
}

/// C_V of `words` against `reference`.
pub fn coherence_cv(words: &[&str], reference: &Corpus, params: &CoherenceParams) -> Result<CoherenceScore> {
    let index = WindowIndex::build(reference, params.window, words.iter().copied())?;
    index.coherence(words, params.epsilon)
}

/// Top-k words of φ_z followed by the top-k words of every σ_{z,c},
/// duplicates removed in first-seen order.
pub fn mixed_topic_words(model: &TrainedModel, z: usize, k: usize) -> Vec<String> {
    let (phi, sigma) = top_word_ids(&model.estimates, z, k);
    let mut seen = HashSet::new();
    phi.iter()
        .chain(sigma.iter().flatten())
        .filter(|(w, _)| seen.insert(*w))
        .map(|&(w, _)| model.vocabulary.word(w).to_owned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedCoherence {
    pub per_topic: Vec<f64>,
    pub union_sizes: Vec<usize>,
    pub mean: f64,
    /// Topic words absent from the reference, summed over topics.
    pub missing_words: usize,
}

/// Mixed topic coherence of every topic and its mean over topics.
pub fn mixed_coherence(
    model: &TrainedModel,
    k: usize,
    reference: &Corpus,
    params: &CoherenceParams,
    exec: Execution,
) -> Result<MixedCoherence> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let topics: Vec<Vec<String>> = (0..model.estimates.topics).map(|z| mixed_topic_words(model, z, k)).collect();
    let index = WindowIndex::build(reference, params.window, topics.iter().flatten().map(String::as_str))?;
    let scores = exec.map(&topics, |_, words| {
        let words: Vec<&str> = words.iter().map(String::as_str).collect();
        index.coherence(&words, params.epsilon)
    });
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    let per_topic: Vec<f64> = scores.iter().map(|s| s.score).collect();
    Ok(MixedCoherence {
        mean: per_topic.iter().sum::<f64>() / per_topic.len() as f64,
        per_topic,
        union_sizes: topics.iter().map(Vec::len).collect(),
        missing_words: scores.iter().map(|s| s.missing.len()).sum(),
    })
}
