//! Held-out evaluation: fold-in inference, classification accuracy,
//! perplexity and C_V / mixed topic coherence.
//!
//! Fold-in keeps every trained parameter fixed and samples only the topic
//! assignments of the held-out document. The switch is summed out of the
//! per-token conditional, so each token is drawn from
//! `(n_dz + α_z) · L_z(w, c)` with `L_z(w, c) = (1 - ψ_zc) φ_z[w] + ψ_zc σ_zc[w]`.

mod coherence;
mod report;

pub use coherence::{
    coherence_cv, mixed_coherence, mixed_topic_words, CoherenceParams, CoherenceScore, MixedCoherence, WindowIndex,
};
pub use report::{
    cross_validate, evaluate_model, project_test, CvConfig, EvalOptions, EvalReport, FoldResult, ModelSummary,
    DEFAULT_TOP_K,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, WordId};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Execution};
use crate::model::TrainedModel;
use crate::sampler::sample_cumulative;

const CLASSIFY_STREAM: u64 = 0xC1A5;
const PERPLEXITY_STREAM: u64 = 0x9E79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldInConfig {
    pub iterations: usize,
    /// θ_d is averaged over this many final sweeps.
    pub average_last: usize,
}

impl Default for FoldInConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            average_last: 10,
        }
    }
}

impl FoldInConfig {
    pub fn validate(&self) -> Result<()> {
        if self.average_last == 0 || self.average_last > self.iterations {
            return Err(Error::InvalidArgument(format!(
                "fold-in averages the last {} of {} sweeps; need 1 <= average_last <= iterations",
                self.average_last, self.iterations
            )));
        }
        Ok(())
    }
}

fn check_word(model: &TrainedModel, w: WordId) -> Result<()> {
    if (w as usize) < model.vocabulary.len() {
        Ok(())
    } else {
        Err(Error::OutOfVocabulary(w))
    }
}

fn check_collection(model: &TrainedModel, c: usize) -> Result<()> {
    if c < model.collections.len() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "collection {c} out of range for a model with {} collections",
            model.collections.len()
        )))
    }
}

/// Estimates θ_d for `tokens` assumed to come from collection `c`.
pub fn fold_in(model: &TrainedModel, tokens: &[WordId], c: usize, cfg: &FoldInConfig, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_collection(model, c)?;
    if tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let est = &model.estimates;
    let t = est.topics;
    let alpha = &model.state.hyper.alpha;
    let alpha_sum: f64 = alpha.iter().sum();

    let mut lik = vec![0.0; tokens.len() * t];
    for (i, &w) in tokens.iter().enumerate() {
        check_word(model, w)?;
        let row = &mut lik[i * t..(i + 1) * t];
        est.topic_word_likelihoods(w, c, row);
        if row.iter().all(|&l| l <= 0.0) {
            row.fill(1.0);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n_dz = vec![0u32; t];
    let mut z: Vec<usize> = Vec::with_capacity(tokens.len());
    for _ in tokens {
        let k = rng.random_range(0..t);
        n_dz[k] += 1;
        z.push(k);
    }
    let mut cum = vec![0.0; t];

    let denom = tokens.len() as f64 + alpha_sum;
    let mut theta = vec![0.0; t];
    let first_kept = cfg.iterations - cfg.average_last;
    for sweep in 0..cfg.iterations {
        for i in 0..tokens.len() {
            n_dz[z[i]] -= 1;
            let row = &lik[i * t..(i + 1) * t];
            let mut acc = 0.0;
            for k in 0..t {
                acc += (n_dz[k] as f64 + alpha[k]) * row[k];
                cum[k] = acc;
            }
            let k = sample_cumulative(&cum, &mut rng);
            n_dz[k] += 1;
            z[i] = k;
        }
        if sweep >= first_kept {
            for k in 0..t {
                theta[k] += (n_dz[k] as f64 + alpha[k]) / denom;
            }
        }
    }
    for v in &mut theta {
        *v /= cfg.average_last as f64;
    }
    Ok(theta)
}

/// `L(w | θ_d, c) = Σ_z θ_d[z] [(1 - ψ_zc) φ_z[w] + ψ_zc σ_zc[w]]`.
pub fn word_likelihood(model: &TrainedModel, w: WordId, theta: &[f64], c: usize) -> Result<f64> {
    check_word(model, w)?;
    check_collection(model, c)?;
    let mut per_topic = vec![0.0; model.estimates.topics];
    model.estimates.topic_word_likelihoods(w, c, &mut per_topic);
    Ok(theta.iter().zip(&per_topic).map(|(a, b)| a * b).sum())
}

/// Natural-log likelihood of a document under θ_d and collection c.
pub fn document_log_likelihood(model: &TrainedModel, tokens: &[WordId], theta: &[f64], c: usize) -> Result<f64> {
    let mut ll = 0.0;
    for &w in tokens {
        ll += word_likelihood(model, w, theta, c)?.ln();
    }
    Ok(ll)
}

/// Normalized exponentials of `log_weights`. The normalizer is summed in
/// descending order so the result does not depend on the order of the input.
pub fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return vec![1.0 / log_weights.len() as f64; log_weights.len()];
    }
    let weights: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let mut sorted = weights.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentClassification {
    pub id: String,
    pub collection: usize,
    pub log_likelihoods: Vec<f64>,
    pub posterior: Vec<f64>,
    /// Posterior mass on the true collection.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub documents: Vec<DocumentClassification>,
    pub accuracy: f64,
}

/// Collection posteriors for every document. θ_d is folded in once per
/// candidate collection; all candidates of a document share one seed.
pub fn classify(
    model: &TrainedModel,
    docs: &[Document],
    cfg: &FoldInConfig,
    seed: u64,
    exec: Execution,
) -> Result<Classification> {
    let c_count = model.collections.len();
    let results = exec.map(docs, |d, doc| -> Result<DocumentClassification> {
        let doc_seed = derive_seed(seed, CLASSIFY_STREAM, d as u64);
        let log_likelihoods = (0..c_count)
            .map(|c| {
                let theta = fold_in(model, &doc.tokens, c, cfg, doc_seed)?;
                document_log_likelihood(model, &doc.tokens, &theta, c)
            })
            .collect::<Result<Vec<f64>>>()?;
        let posterior = softmax(&log_likelihoods);
        let accuracy = posterior.get(doc.collection).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("document {} has collection {} outside the model", doc.id, doc.collection))
        })?;
        Ok(DocumentClassification {
            id: doc.id.clone(),
            collection: doc.collection,
            log_likelihoods,
            posterior,
            accuracy,
        })
    });
    let documents = results.into_iter().collect::<Result<Vec<_>>>()?;
    let accuracy = mean_accuracy(&documents);
    Ok(Classification { documents, accuracy })
}

pub fn mean_accuracy(docs: &[DocumentClassification]) -> f64 {
    if docs.is_empty() {
        return f64::NAN;
    }
    docs.iter().map(|d| d.accuracy).sum::<f64>() / docs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perplexity {
    pub value: f64,
    /// Evaluated token count M.
    pub tokens: usize,
    pub log2_likelihood: f64,
}

/// `2^(-(1/M) Σ_w log2 L(w | θ_d, c_d))`, folding each document in under
/// its true collection.
pub fn perplexity(
    model: &TrainedModel,
    docs: &[Document],
    cfg: &FoldInConfig,
    seed: u64,
    exec: Execution,
) -> Result<Perplexity> {
    let per_doc = exec.map(docs, |d, doc| -> Result<(f64, usize)> {
        if doc.tokens.is_empty() {
            return Ok((0.0, 0));
        }
        let theta = fold_in(model, &doc.tokens, doc.collection, cfg, derive_seed(seed, PERPLEXITY_STREAM, d as u64))?;
        let mut ll = 0.0;
        for &w in &doc.tokens {
            ll += word_likelihood(model, w, &theta, doc.collection)?.log2();
        }
        Ok((ll, doc.tokens.len()))
    });
    let mut log2_likelihood = 0.0;
    let mut tokens = 0;
    for r in per_doc {
        let (ll, n) = r?;
        log2_likelihood += ll;
        tokens += n;
    }
    if tokens == 0 {
        return Err(Error::NoTokens);
    }
    Ok(Perplexity {
        value: (-log2_likelihood / tokens as f64).exp2(),
        tokens,
        log2_likelihood,
    })
}
