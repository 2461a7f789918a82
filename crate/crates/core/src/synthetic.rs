//! Synthetic corpora with known structure.
//!
//! [`planted`] draws documents from a cross-collection generative process
//! whose specific vocabulary is known, and [`zipf`] draws tokens from a Zipf
//! law independently of the collection.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Zipf};

use crate::corpus::{Corpus, RawDocument};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub collections: usize,
    pub topics: usize,
    pub vocab_size: usize,
    /// Share of the vocabulary reserved for collection-specific words.
    pub specific_fraction: f64,
    pub documents: usize,
    pub doc_len: usize,
    /// Probability that a token is drawn from the collection-specific side.
    pub specific_token_share: f64,
    /// Probability that a specific token is drawn from another collection's
    /// specific words instead of its own.
    pub leakage: f64,
    /// Symmetric Dirichlet concentration of document topic mixtures.
    pub doc_alpha: f64,
    /// Symmetric Dirichlet concentration of each topic's word block.
    pub word_concentration: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            collections: 2,
            topics: 5,
            vocab_size: 1000,
            specific_fraction: 0.2,
            documents: 1000,
            doc_len: 100,
            specific_token_share: 0.2,
            leakage: 0.05,
            doc_alpha: 0.5,
            word_concentration: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub corpus: Corpus,
    /// Words planted as collection-specific.
    pub specific: BTreeSet<String>,
}

fn dirichlet<R: Rng + ?Sized>(rng: &mut R, dim: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut v: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        v.fill(1.0 / dim as f64);
    }
    v
}

/// Dirichlet weights on the z-th of `parts` contiguous blocks of `dim`
/// words, zero elsewhere.
fn block<R: Rng + ?Sized>(rng: &mut R, dim: usize, parts: usize, z: usize, concentration: f64) -> Vec<f64> {
    let (lo, hi) = (z * dim / parts, (z + 1) * dim / parts);
    let mut v = vec![0.0; dim];
    v[lo..hi].copy_from_slice(&dirichlet(rng, hi - lo, concentration));
    v
}

fn weighted(weights: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(weights).expect("nonzero weights")
}

/// Documents alternate over collections. Topic z owns the z-th block of the
/// shared words and of every collection's specific words. Each token picks a
/// topic from the document mixture, then either a shared word of that topic or, with
/// probability `specific_token_share`, a specific word of the document's
/// collection (of another collection with probability `leakage`).
pub fn planted(cfg: &PlantedConfig) -> Result<PlantedCorpus> {
    let c_count = cfg.collections;
    if c_count < 2 {
        return Err(Error::TooFewCollections(c_count));
    }
    if cfg.topics == 0 || cfg.documents < c_count || cfg.doc_len == 0 {
        return Err(Error::InvalidArgument("planted corpus needs topics, documents and tokens".into()));
    }
    for (name, p) in [
        ("specific_fraction", cfg.specific_fraction),
        ("specific_token_share", cfg.specific_token_share),
        ("leakage", cfg.leakage),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    let per_collection = ((cfg.vocab_size as f64 * cfg.specific_fraction) / c_count as f64).round() as usize;
    let shared = cfg.vocab_size - per_collection * c_count;
    if shared == 0 || per_collection == 0 {
        return Err(Error::InvalidArgument("vocabulary too small for the requested split".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shared_words: Vec<String> = (0..shared).map(|i| format!("g{i:04}")).collect();
    let specific_words: Vec<Vec<String>> = (0..c_count)
        .map(|c| (0..per_collection).map(|i| format!("s{c}_{i:04}")).collect())
        .collect();
    let phi: Vec<WeightedIndex<f64>> = (0..cfg.topics)
        .map(|z| weighted(&block(&mut rng, shared, cfg.topics, z, cfg.word_concentration)))
        .collect();
    let sigma: Vec<Vec<WeightedIndex<f64>>> = (0..cfg.topics)
        .map(|z| {
            (0..c_count)
                .map(|_| weighted(&block(&mut rng, per_collection, cfg.topics, z, cfg.word_concentration)))
                .collect()
        })
        .collect();

    let mut raw = Vec::with_capacity(cfg.documents);
    for d in 0..cfg.documents {
        let c = d % c_count;
        let theta = weighted(&dirichlet(&mut rng, cfg.topics, cfg.doc_alpha));
        let mut tokens = Vec::with_capacity(cfg.doc_len);
        for _ in 0..cfg.doc_len {
            let z = theta.sample(&mut rng);
            if rng.random::<f64>() < cfg.specific_token_share {
                let source = if rng.random::<f64>() < cfg.leakage {
                    (c + 1 + rng.random_range(0..c_count - 1)) % c_count
                } else {
                    c
                };
                tokens.push(specific_words[source][sigma[z][source].sample(&mut rng)].clone());
            } else {
                tokens.push(shared_words[phi[z].sample(&mut rng)].clone());
            }
        }
        raw.push(RawDocument::new(format!("doc{d:05}"), format!("c{c}"), tokens));
    }
    let order: Vec<String> = (0..c_count).map(|c| format!("c{c}")).collect();
    let corpus = Corpus::from_raw(raw, Some(&order))?;
    let specific = specific_words.into_iter().flatten().collect();
    Ok(PlantedCorpus { corpus, specific })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfConfig {
    pub collections: usize,
    pub vocab_size: usize,
    pub exponent: f64,
    pub documents: usize,
    pub doc_len: usize,
    pub seed: u64,
}

impl Default for ZipfConfig {
    fn default() -> Self {
        Self {
            collections: 2,
            vocab_size: 200_000,
            exponent: 1.0,
            documents: 500,
            doc_len: 100,
            seed: 1,
        }
    }
}

/// Tokens drawn i.i.d. from a Zipf law over `vocab_size` ranks, with
/// documents alternating over collections.
pub fn zipf(cfg: &ZipfConfig) -> Result<Corpus> {
    if cfg.collections < 2 {
        return Err(Error::TooFewCollections(cfg.collections));
    }
    let law = Zipf::new(cfg.vocab_size as f64, cfg.exponent)
        .map_err(|e| Error::InvalidArgument(format!("zipf law: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let raw = (0..cfg.documents)
        .map(|d| {
            let tokens: Vec<String> = (0..cfg.doc_len)
                .map(|_| format!("w{}", law.sample(&mut rng) as u64))
                .collect();
            RawDocument::new(format!("doc{d:05}"), format!("c{}", d % cfg.collections), tokens)
        })
        .collect();
    let order: Vec<String> = (0..cfg.collections).map(|c| format!("c{c}")).collect();
    Corpus::from_raw(raw, Some(&order))
}
