//! Shared state for both model variants.
//!
//! Count tables are flat `Vec<u32>`s with the topic as the innermost axis,
//! since the samplers read all topics of one word at a time:
//!
//! | table           | index                       |
//! |-----------------|-----------------------------|
//! | `n_dz`          | `d * T + z`                 |
//! | `n_phi`         | `phi_local(w) * T + z`      |
//! | `n_phi_total`   | `z`                         |
//! | `n_sigma`       | `(c * V_s + s_local(w)) * T + z` |
//! | `n_sigma_total` | `c * T + z`                 |
//! | `n_notx`        | `c * T + z`                 |
//!
//! φ and σ tables only have rows for the words in their support. For the
//! entropy variant the supports are the two halves of the vocabulary
//! partition, so a σ count for an independent word cannot be represented at
//! all. For ccLDA both supports are the whole vocabulary.

mod estimates;
mod io;
mod report;

pub use estimates::{point_estimates, Estimates};
pub use io::{from_bytes, load_model, save_model, to_bytes, FORMAT_VERSION, MAGIC};
pub use report::{export_domain_terms, top_word_ids, RankedIds, top_words, RankedWord, TopicReport, TopicWords};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Vocabulary, WordId};
use crate::error::{Error, Result};
use crate::termhood::VocabularyPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// x fixed per word by the entropy partition.
    Entropy,
    /// x sampled per token.
    #[serde(rename = "cclda")]
    CcLda,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Entropy => "entropy",
            Variant::CcLda => "cclda",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "entropy" => Ok(Variant::Entropy),
            "cclda" => Ok(Variant::CcLda),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}` (expected entropy or cclda)"))),
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BACKGROUND_ALPHA: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub topics: usize,
    /// One prior per topic.
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub delta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub burn_in: usize,
    pub samples: usize,
    pub lag: usize,
    pub seed: u64,
}

impl Hyperparameters {
    /// Defaults: α = 1 with a background topic 0 at α = 5, β = δ = 0.01,
    /// γ0 = γ1 = 1, 200 burn-in sweeps, 10 samples 10 sweeps apart.
    pub fn new(topics: usize) -> Self {
        Self {
            topics,
            alpha: Self::alpha_vector(topics, DEFAULT_ALPHA, Some(DEFAULT_BACKGROUND_ALPHA)),
            beta: 0.01,
            delta: 0.01,
            gamma0: 1.0,
            gamma1: 1.0,
            burn_in: 200,
            samples: 10,
            lag: 10,
            seed: 0,
        }
    }

    pub fn alpha_vector(topics: usize, alpha: f64, background: Option<f64>) -> Vec<f64> {
        let mut v = vec![alpha; topics];
        if let (Some(bg), Some(first)) = (background, v.first_mut()) {
            *first = bg;
        }
        v
    }

    pub fn with_uniform_alpha(mut self, alpha: f64) -> Self {
        self.alpha = vec![alpha; self.topics];
        self
    }

    pub fn with_schedule(mut self, burn_in: usize, samples: usize, lag: usize) -> Self {
        self.burn_in = burn_in;
        self.samples = samples;
        self.lag = lag;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_sweeps(&self) -> usize {
        self.burn_in + self.samples * self.lag
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.topics == 0 {
            return bad("topic count must be at least 1".into());
        }
        if self.alpha.len() != self.topics {
            return bad(format!("alpha has {} entries for {} topics", self.alpha.len(), self.topics));
        }
        let priors = self
            .alpha
            .iter()
            .chain([&self.beta, &self.delta, &self.gamma0, &self.gamma1]);
        for &p in priors {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("priors must be positive and finite, got {p}"));
            }
        }
        if self.burn_in == 0 || self.samples == 0 || self.lag == 0 {
            return bad("burn_in, samples and lag must all be at least 1".into());
        }
        Ok(())
    }
}

const ABSENT: u32 = u32::MAX;

/// Maps global word ids onto a dense local index for one distribution's
/// support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    local: Vec<u32>,
    global: Vec<WordId>,
}

impl Support {
    pub fn full(vocab_size: usize) -> Self {
        Self {
            local: (0..vocab_size as u32).collect(),
            global: (0..vocab_size as WordId).collect(),
        }
    }

    /// Words whose flag equals `keep`.
    pub fn from_flags(flags: &[bool], keep: bool) -> Self {
        let mut local = vec![ABSENT; flags.len()];
        let mut global = Vec::new();
        for (w, &f) in flags.iter().enumerate() {
            if f == keep {
                local[w] = global.len() as u32;
                global.push(w as WordId);
            }
        }
        Self { local, global }
    }

    #[inline]
    pub fn local(&self, w: WordId) -> Option<usize> {
        match self.local[w as usize] {
            ABSENT => None,
            l => Some(l as usize),
        }
    }

    #[inline]
    pub fn contains(&self, w: WordId) -> bool {
        self.local[w as usize] != ABSENT
    }

    pub fn size(&self) -> usize {
        self.global.len()
    }

    pub fn words(&self) -> &[WordId] {
        &self.global
    }

    pub fn vocab_size(&self) -> usize {
        self.local.len()
    }
}

/// Gibbs state: assignments plus every count table, for one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub(crate) variant: Variant,
    pub(crate) hyper: Hyperparameters,
    pub(crate) partition: Option<VocabularyPartition>,
    pub(crate) collections: usize,
    pub(crate) phi_support: Support,
    pub(crate) sigma_support: Support,
    pub(crate) doc_collection: Vec<u32>,
    /// Token range of document `d` is `doc_offset[d]..doc_offset[d + 1]`.
    pub(crate) doc_offset: Vec<usize>,
    pub(crate) z: Vec<u32>,
    pub(crate) x: Vec<bool>,
    pub(crate) n_dz: Vec<u32>,
    pub(crate) n_phi: Vec<u32>,
    pub(crate) n_phi_total: Vec<u32>,
    pub(crate) n_sigma: Vec<u32>,
    pub(crate) n_sigma_total: Vec<u32>,
    pub(crate) n_notx: Vec<u32>,
}

/// Builds a randomly initialized state using a PRNG seeded from `hyper.seed`.
pub fn init_state(
    corpus: &Corpus,
    hyper: &Hyperparameters,
    variant: Variant,
    partition: Option<&VocabularyPartition>,
) -> Result<ModelState> {
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    ModelState::initialize(corpus, hyper, variant, partition, &mut rng)
}

impl ModelState {
    /// Uniform random topics; fair-coin x for ccLDA, partition-determined x
    /// for the entropy variant.
    pub fn initialize<R: Rng + ?Sized>(
        corpus: &Corpus,
        hyper: &Hyperparameters,
        variant: Variant,
        partition: Option<&VocabularyPartition>,
        rng: &mut R,
    ) -> Result<ModelState> {
        hyper.validate()?;
        let v = corpus.vocab_size();
        let (phi_support, sigma_support, partition) = match variant {
            Variant::Entropy => {
                let partition = partition.ok_or_else(|| {
                    Error::InvalidArgument("the entropy variant requires a vocabulary partition".into())
                })?;
                if partition.vocab_size() != v {
                    return Err(Error::PartitionMismatch {
                        partition: partition.vocab_size(),
                        vocabulary: v,
                    });
                }
                (
                    Support::from_flags(partition.flags(), false),
                    Support::from_flags(partition.flags(), true),
                    Some(partition.clone()),
                )
            }
            Variant::CcLda => (Support::full(v), Support::full(v), None),
        };
        let t = hyper.topics;
        let c = corpus.num_collections();
        let mut doc_offset = Vec::with_capacity(corpus.num_documents() + 1);
        doc_offset.push(0);
        for doc in corpus.documents() {
            doc_offset.push(doc_offset.last().unwrap() + doc.tokens.len());
        }
        let n_tokens = *doc_offset.last().unwrap();
        let mut state = ModelState {
            variant,
            hyper: hyper.clone(),
            partition,
            collections: c,
            n_dz: vec![0; corpus.num_documents() * t],
            n_phi: vec![0; phi_support.size() * t],
            n_phi_total: vec![0; t],
            n_sigma: vec![0; c * sigma_support.size() * t],
            n_sigma_total: vec![0; c * t],
            n_notx: vec![0; c * t],
            phi_support,
            sigma_support,
            doc_collection: corpus.documents().iter().map(|d| d.collection as u32).collect(),
            doc_offset,
            z: Vec::with_capacity(n_tokens),
            x: Vec::with_capacity(n_tokens),
        };
        for (d, doc) in corpus.documents().iter().enumerate() {
            for &w in &doc.tokens {
                let z = if t == 1 { 0 } else { rng.random_range(0..t) };
                let x = match variant {
                    Variant::Entropy => state.sigma_support.contains(w),
                    Variant::CcLda => rng.random_bool(0.5),
                };
                state.z.push(z as u32);
                state.x.push(x);
                state.increment(d, doc.collection, w, z, x);
            }
        }
        Ok(state)
    }

    #[inline]
    pub(crate) fn increment(&mut self, d: usize, c: usize, w: WordId, z: usize, x: bool) {
        let t = self.hyper.topics;
        self.n_dz[d * t + z] += 1;
        if x {
            let s = self.sigma_support.local(w).expect("σ count for a word outside the σ support");
            self.n_sigma[(c * self.sigma_support.size() + s) * t + z] += 1;
            self.n_sigma_total[c * t + z] += 1;
        } else {
            let p = self.phi_support.local(w).expect("φ count for a word outside the φ support");
            self.n_phi[p * t + z] += 1;
            self.n_phi_total[z] += 1;
            self.n_notx[c * t + z] += 1;
        }
    }

    #[inline]
    pub(crate) fn decrement(&mut self, d: usize, c: usize, w: WordId, z: usize, x: bool) {
        let t = self.hyper.topics;
        self.n_dz[d * t + z] -= 1;
        if x {
            let s = self.sigma_support.local(w).expect("σ count for a word outside the σ support");
            self.n_sigma[(c * self.sigma_support.size() + s) * t + z] -= 1;
            self.n_sigma_total[c * t + z] -= 1;
        } else {
            let p = self.phi_support.local(w).expect("φ count for a word outside the φ support");
            self.n_phi[p * t + z] -= 1;
            self.n_phi_total[z] -= 1;
            self.n_notx[c * t + z] -= 1;
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn partition(&self) -> Option<&VocabularyPartition> {
        self.partition.as_ref()
    }

    pub fn topics(&self) -> usize {
        self.hyper.topics
    }

    pub fn num_collections(&self) -> usize {
        self.collections
    }

    pub fn num_documents(&self) -> usize {
        self.doc_collection.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.z.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.phi_support.vocab_size()
    }

    pub fn phi_support(&self) -> &Support {
        &self.phi_support
    }

    pub fn sigma_support(&self) -> &Support {
        &self.sigma_support
    }

    pub fn doc_collection(&self, d: usize) -> usize {
        self.doc_collection[d] as usize
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.doc_offset[d + 1] - self.doc_offset[d]
    }

    pub fn topic_assignments(&self) -> &[u32] {
        &self.z
    }

    pub fn switch_assignments(&self) -> &[bool] {
        &self.x
    }

    pub fn n_dz(&self, d: usize, z: usize) -> u32 {
        self.n_dz[d * self.topics() + z]
    }

    /// φ count of global word `w` in topic `z` (0 outside the φ support).
    pub fn n_zw_phi(&self, z: usize, w: WordId) -> u32 {
        self.phi_support
            .local(w)
            .map_or(0, |p| self.n_phi[p * self.topics() + z])
    }

    pub fn n_z_phi(&self, z: usize) -> u32 {
        self.n_phi_total[z]
    }

    /// σ count of global word `w` in topic `z`, collection `c`.
    pub fn n_zcw_sigma(&self, z: usize, c: usize, w: WordId) -> u32 {
        self.sigma_support
            .local(w)
            .map_or(0, |s| self.n_sigma[(c * self.sigma_support.size() + s) * self.topics() + z])
    }

    pub fn n_zc_sigma(&self, z: usize, c: usize) -> u32 {
        self.n_sigma_total[c * self.topics() + z]
    }

    /// Tokens of collection `c` in topic `z` with x = 1.
    pub fn n_zc_x(&self, z: usize, c: usize) -> u32 {
        self.n_zc_sigma(z, c)
    }

    /// Tokens of collection `c` in topic `z` with x = 0.
    pub fn n_z_notx(&self, z: usize, c: usize) -> u32 {
        self.n_notx[c * self.topics() + z]
    }

    pub(crate) fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        if corpus.num_documents() != self.num_documents()
            || corpus.num_tokens() != self.num_tokens()
            || corpus.vocab_size() != self.vocab_size()
            || corpus.num_collections() != self.collections
        {
            return Err(Error::CorpusMismatch(format!(
                "state has D={} M={} V={} C={}, corpus has D={} M={} V={} C={}",
                self.num_documents(),
                self.num_tokens(),
                self.vocab_size(),
                self.collections,
                corpus.num_documents(),
                corpus.num_tokens(),
                corpus.vocab_size(),
                corpus.num_collections()
            )));
        }
        Ok(())
    }

    /// Recomputes every count table from the assignments and compares it
    /// with the stored one; also checks the support and marginal invariants.
    pub fn audit(&self, corpus: &Corpus) -> std::result::Result<(), String> {
        self.check_corpus(corpus).map_err(|e| e.to_string())?;
        let t = self.topics();
        let mut fresh = ModelState {
            n_dz: vec![0; self.n_dz.len()],
            n_phi: vec![0; self.n_phi.len()],
            n_phi_total: vec![0; t],
            n_sigma: vec![0; self.n_sigma.len()],
            n_sigma_total: vec![0; self.n_sigma_total.len()],
            n_notx: vec![0; self.n_notx.len()],
            z: Vec::new(),
            x: Vec::new(),
            ..self.clone()
        };
        let mut i = 0;
        for (d, doc) in corpus.documents().iter().enumerate() {
            if doc.collection != self.doc_collection(d) || doc.tokens.len() != self.doc_len(d) {
                return Err(format!("document {d} does not match the state"));
            }
            for &w in &doc.tokens {
                let (z, x) = (self.z[i] as usize, self.x[i]);
                if z >= t {
                    return Err(format!("token {i} has topic {z} >= {t}"));
                }
                if self.variant == Variant::Entropy && x != self.sigma_support.contains(w) {
                    return Err(format!("token {i}: switch disagrees with the partition"));
                }
                let supported = if x {
                    self.sigma_support.contains(w)
                } else {
                    self.phi_support.contains(w)
                };
                if !supported {
                    return Err(format!("token {i}: word {w} outside its distribution's support"));
                }
                fresh.increment(d, doc.collection, w, z, x);
                i += 1;
            }
        }
        let tables = [
            ("n_dz", &self.n_dz, &fresh.n_dz),
            ("n_phi", &self.n_phi, &fresh.n_phi),
            ("n_phi_total", &self.n_phi_total, &fresh.n_phi_total),
            ("n_sigma", &self.n_sigma, &fresh.n_sigma),
            ("n_sigma_total", &self.n_sigma_total, &fresh.n_sigma_total),
            ("n_notx", &self.n_notx, &fresh.n_notx),
        ];
        for (name, stored, recomputed) in tables {
            if stored != recomputed {
                return Err(format!("count table {name} is inconsistent with the assignments"));
            }
        }
        let phi_mass: u64 = self.n_phi_total.iter().map(|&n| n as u64).sum();
        let sigma_mass: u64 = self.n_sigma_total.iter().map(|&n| n as u64).sum();
        if (phi_mass + sigma_mass) as usize != corpus.num_tokens() {
            return Err("φ and σ mass does not add up to M".into());
        }
        if self.variant == Variant::Entropy {
            let overlap = self.phi_support.words().iter().any(|&w| self.sigma_support.contains(w));
            if overlap {
                return Err("φ and σ supports overlap".into());
            }
        }
        Ok(())
    }
}

/// One sweep of the training chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub elapsed_secs: f64,
    pub log_likelihood: f64,
}

/// A trained chain ready for evaluation: the final state, the point
/// estimates averaged over the retained samples, and the names needed to
/// report them.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub state: ModelState,
    pub estimates: Estimates,
    pub vocabulary: Vocabulary,
    pub collections: Vec<String>,
    pub trace: Vec<IterationRecord>,
    /// Configuration echo stored with the model file.
    pub config: Option<String>,
}

impl TrainedModel {
    /// Wraps a state using its own current point estimates.
    pub fn from_state(state: ModelState, corpus: &Corpus) -> Self {
        let estimates = point_estimates(&state);
        Self {
            state,
            estimates,
            vocabulary: corpus.vocabulary().clone(),
            collections: corpus.collections().to_vec(),
            trace: Vec::new(),
            config: None,
        }
    }

    pub fn variant(&self) -> Variant {
        self.state.variant
    }

    pub fn gamma(&self) -> Option<f64> {
        self.state.partition.as_ref().map(|p| p.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RawDocument;
    use crate::termhood::partition_vocabulary;

    pub(crate) fn small_corpus() -> Corpus {
        let raw = vec![
            RawDocument::new("a", "x", ["apparatus", "method", "system", "apparatus"]),
            RawDocument::new("b", "x", ["apparatus", "device", "method"]),
            RawDocument::new("c", "y", ["paper", "method", "system", "approach"]),
            RawDocument::new("d", "y", ["approach", "paper", "system"]),
        ];
        Corpus::from_raw(raw, None).unwrap()
    }

    #[test]
    fn single_topic_init() {
        let corpus = small_corpus();
        let hyper = Hyperparameters::new(1);
        let state = init_state(&corpus, &hyper, Variant::CcLda, None).unwrap();
        assert!(state.z.iter().all(|&z| z == 0));
        for d in 0..corpus.num_documents() {
            assert_eq!(state.n_dz(d, 0) as usize, corpus.documents()[d].tokens.len());
        }
        state.audit(&corpus).unwrap();
    }

    #[test]
    fn entropy_init_respects_partition() {
        let corpus = small_corpus();
        let partition = partition_vocabulary(&corpus, None).unwrap();
        let hyper = Hyperparameters::new(3).with_seed(9);
        let state = init_state(&corpus, &hyper, Variant::Entropy, Some(&partition)).unwrap();
        state.audit(&corpus).unwrap();
        let apparatus = corpus.vocabulary().id("apparatus").unwrap();
        let method = corpus.vocabulary().id("method").unwrap();
        assert!(partition.is_specific(apparatus));
        assert!(!partition.is_specific(method));
        for z in 0..3 {
            assert_eq!(state.n_zw_phi(z, apparatus), 0);
            for c in 0..2 {
                assert_eq!(state.n_zcw_sigma(z, c, method), 0);
            }
        }
        let sigma: u32 = (0..3).map(|z| state.n_zcw_sigma(z, 0, apparatus)).sum();
        assert_eq!(sigma, 3);
    }

    #[test]
    fn init_is_deterministic() {
        let corpus = small_corpus();
        let hyper = Hyperparameters::new(4).with_seed(17);
        let a = init_state(&corpus, &hyper, Variant::CcLda, None).unwrap();
        let b = init_state(&corpus, &hyper, Variant::CcLda, None).unwrap();
        assert_eq!(a, b);
        let c = init_state(&corpus, &hyper.clone().with_seed(18), Variant::CcLda, None).unwrap();
        assert_ne!(a.z, c.z);
    }

    #[test]
    fn init_rejects_bad_inputs() {
        let corpus = small_corpus();
        let hyper = Hyperparameters::new(2);
        assert!(init_state(&corpus, &hyper, Variant::Entropy, None).is_err());
        let wrong = VocabularyPartition::from_flags(0.9, vec![true; 3], 0.5);
        assert!(matches!(
            init_state(&corpus, &hyper, Variant::Entropy, Some(&wrong)),
            Err(Error::PartitionMismatch { partition: 3, .. })
        ));
        let mut bad = hyper.clone();
        bad.beta = 0.0;
        assert!(init_state(&corpus, &bad, Variant::CcLda, None).is_err());
        assert!(init_state(&corpus, &Hyperparameters::new(2).with_schedule(0, 1, 1), Variant::CcLda, None).is_err());
    }

    #[test]
    fn hyper_defaults() {
        let h = Hyperparameters::new(4);
        assert_eq!(h.alpha, vec![5.0, 1.0, 1.0, 1.0]);
        assert_eq!((h.beta, h.delta, h.gamma0, h.gamma1), (0.01, 0.01, 1.0, 1.0));
        assert_eq!(h.total_sweeps(), 300);
        assert_eq!("CCLDA".parse::<Variant>().unwrap(), Variant::CcLda);
        assert!("lda".parse::<Variant>().is_err());
    }

    #[test]
    fn audit_detects_corruption() {
        let corpus = small_corpus();
        let mut state = init_state(&corpus, &Hyperparameters::new(2), Variant::CcLda, None).unwrap();
        state.n_phi_total[0] += 1;
        assert!(state.audit(&corpus).is_err());
    }
}
