//! Entropy-based termhood and the specific / independent vocabulary split.
//!
//! For each word the collection posterior is estimated from Laplace-smoothed
//! token counts, `P(c|w) = (tf(w,c) + 1) / sum_c' (tf(w,c') + 1)`, and its
//! Shannon entropy is normalized by `log2 C`. Low entropy means the word is
//! skewed towards some collection (collection-specific); high entropy means
//! it is spread evenly (collection-independent). Termhood is `1 - H(w)`.
//!
//! The default split point is the entropy of a hapax legomenon after
//! smoothing, i.e. of the vector `(2, 1, ..., 1) / (C + 1)`. Words at or
//! below it are collection-specific.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, WordId};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct WordStats {
    pub word: WordId,
    pub smoothed_counts: Vec<u64>,
    pub posterior: Vec<f64>,
    pub entropy: f64,
    pub termhood: f64,
}

/// Laplace-smoothed collection posterior for raw per-collection counts.
pub fn posterior_from_counts(counts: &[u32]) -> Vec<f64> {
    let total: f64 = counts.iter().map(|&n| n as f64 + 1.0).sum();
    counts.iter().map(|&n| (n as f64 + 1.0) / total).collect()
}

/// Shannon entropy of `posterior` divided by `log2 C`, with `0 log 0 = 0`.
///
/// Terms are summed in descending probability order, so permuting the
/// collections yields a bit-identical result.
pub fn normalized_entropy(posterior: &[f64]) -> Result<f64> {
    let c = posterior.len();
    if c < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalized entropy needs at least 2 collections, got {c}"
        )));
    }
    let mut sorted = posterior.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let h: f64 = sorted
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    Ok((h / (c as f64).log2()).clamp(0.0, 1.0))
}

/// Entropy of a smoothed hapax legomenon for `c` collections.
pub fn hapax_threshold(c: usize) -> Result<f64> {
    if c < 2 {
        return Err(Error::InvalidArgument(format!("hapax threshold needs at least 2 collections, got {c}")));
    }
    let mut counts = vec![0u32; c];
    counts[0] = 1;
    normalized_entropy(&posterior_from_counts(&counts))
}

pub fn estimate_posteriors(corpus: &Corpus) -> Vec<WordStats> {
    estimate_posteriors_with(corpus, Execution::default())
}

pub fn estimate_posteriors_with(corpus: &Corpus, exec: Execution) -> Vec<WordStats> {
    exec.map_range(corpus.vocab_size(), |w| {
        let counts = corpus.word_counts(w as WordId);
        let posterior = posterior_from_counts(counts);
        let entropy = normalized_entropy(&posterior).expect("corpus has >= 2 collections");
        WordStats {
            word: w as WordId,
            smoothed_counts: counts.iter().map(|&n| n as u64 + 1).collect(),
            posterior,
            entropy,
            termhood: 1.0 - entropy,
        }
    })
}

/// Split of the vocabulary into collection-specific and
/// collection-independent words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyPartition {
    pub threshold: f64,
    is_specific: Vec<bool>,
    /// Fraction of token occurrences that belong to specific words.
    pub gamma: f64,
}

impl VocabularyPartition {
    pub fn from_flags(threshold: f64, is_specific: Vec<bool>, gamma: f64) -> Self {
        Self {
            threshold,
            is_specific,
            gamma,
        }
    }

    pub fn is_specific(&self, w: WordId) -> bool {
        self.is_specific[w as usize]
    }

    pub fn flags(&self) -> &[bool] {
        &self.is_specific
    }

    pub fn vocab_size(&self) -> usize {
        self.is_specific.len()
    }

    pub fn specific(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.is_specific.len() as WordId).filter(|&w| self.is_specific[w as usize])
    }

    pub fn independent(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.is_specific.len() as WordId).filter(|&w| !self.is_specific[w as usize])
    }

    pub fn num_specific(&self) -> usize {
        self.is_specific.iter().filter(|&&s| s).count()
    }

    pub fn num_independent(&self) -> usize {
        self.is_specific.len() - self.num_specific()
    }
}

pub fn partition_vocabulary(corpus: &Corpus, threshold: Option<f64>) -> Result<VocabularyPartition> {
    let stats = estimate_posteriors(corpus);
    partition_from_stats(corpus, &stats, threshold)
}

/// Words with `H(w) <= threshold` are specific; ties go to specific.
pub fn partition_from_stats(corpus: &Corpus, stats: &[WordStats], threshold: Option<f64>) -> Result<VocabularyPartition> {
    let threshold = match threshold {
        Some(t) if t.is_nan() => return Err(Error::InvalidArgument("threshold is NaN".into())),
        Some(t) => t,
        None => hapax_threshold(corpus.num_collections())?,
    };
    let flags = stats.iter().map(|s| s.entropy <= threshold).collect();
    let mut partition = VocabularyPartition::from_flags(threshold, flags, 0.0);
    partition.gamma = estimate_gamma(corpus, &partition);
    Ok(partition)
}

/// Raw occurrences of specific words divided by the total token count.
pub fn estimate_gamma(corpus: &Corpus, partition: &VocabularyPartition) -> f64 {
    let specific: u64 = partition.specific().map(|w| corpus.word_total(w)).sum();
    specific as f64 / corpus.num_tokens() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyHistogram {
    /// Bin counts over [0, 1]; `H = 1` falls in the last bin.
    pub bins: Vec<usize>,
    pub hapax_threshold: f64,
    /// Number of words whose entropy equals the hapax threshold exactly.
    pub at_hapax: usize,
    /// Most frequent exact entropy value and its word count.
    pub mode: (f64, usize),
}

pub fn entropy_histogram(corpus: &Corpus, bins: usize) -> Result<EntropyHistogram> {
    let stats = estimate_posteriors(corpus);
    histogram_from_stats(corpus.num_collections(), &stats, bins)
}

pub fn histogram_from_stats(collections: usize, stats: &[WordStats], bins: usize) -> Result<EntropyHistogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let hapax = hapax_threshold(collections)?;
    let mut counts = vec![0; bins];
    for s in stats {
        let b = ((s.entropy * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let at_hapax = stats.iter().filter(|s| s.entropy == hapax).count();
    let mode = distinct_entropies(stats)
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .unwrap_or((hapax, 0));
    Ok(EntropyHistogram {
        bins: counts,
        hapax_threshold: hapax,
        at_hapax,
        mode,
    })
}

/// Distinct exact entropy values (ascending) with their word counts.
pub fn distinct_entropies(stats: &[WordStats]) -> Vec<(f64, usize)> {
    let mut values: Vec<f64> = stats.iter().map(|s| s.entropy).collect();
    values.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((last, n)) if *last == v => *n += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub threshold: f64,
    pub gamma: f64,
    /// Number of specific words at this threshold.
    pub specific_words: usize,
}

/// γ as a function of the threshold, evaluated at every distinct entropy
/// value in the vocabulary (ascending). This is the exact sweep grid.
pub fn gamma_curve(corpus: &Corpus, stats: &[WordStats]) -> Vec<GammaPoint> {
    let mut order: Vec<&WordStats> = stats.iter().collect();
    order.sort_by(|a, b| a.entropy.total_cmp(&b.entropy));
    let m = corpus.num_tokens() as f64;
    let mut out: Vec<GammaPoint> = Vec::new();
    let mut mass = 0u64;
    let mut words = 0usize;
    let mut i = 0;
    while i < order.len() {
        let h = order[i].entropy;
        while i < order.len() && order[i].entropy == h {
            mass += corpus.word_total(order[i].word);
            words += 1;
            i += 1;
        }
        out.push(GammaPoint {
            threshold: h,
            gamma: mass as f64 / m,
            specific_words: words,
        });
    }
    out
}

/// The threshold whose inclusion produces the largest single increase of γ
/// along the curve, with the size of that jump.
pub fn largest_gamma_jump(curve: &[GammaPoint]) -> Option<(f64, f64)> {
    let mut prev = 0.0;
    let mut best: Option<(f64, f64)> = None;
    for p in curve {
        let jump = p.gamma - prev;
        if best.is_none_or(|(_, j)| jump > j) {
            best = Some((p.threshold, jump));
        }
        prev = p.gamma;
    }
    best
}

/// Writes the termhood ranking as TSV, sorted by termhood descending
/// (ties by word id ascending).
pub fn write_rank_tsv<W: Write + ?Sized>(
    out: &mut W,
    corpus: &Corpus,
    stats: &[WordStats],
    partition: &VocabularyPartition,
) -> std::io::Result<()> {
    let mut order: Vec<&WordStats> = stats.iter().collect();
    order.sort_by(|a, b| b.termhood.total_cmp(&a.termhood).then(a.word.cmp(&b.word)));
    write!(out, "word")?;
    for c in corpus.collections() {
        write!(out, "\ttf_{c}")?;
    }
    writeln!(out, "\tentropy\ttermhood\tpartition")?;
    for s in order {
        write!(out, "{}", corpus.vocabulary().word(s.word))?;
        for &n in corpus.word_counts(s.word) {
            write!(out, "\t{n}")?;
        }
        let label = if partition.is_specific(s.word) {
            "specific"
        } else {
            "independent"
        };
        writeln!(out, "\t{:.6}\t{:.6}\t{label}", s.entropy, s.termhood)?;
    }
    Ok(())
}
