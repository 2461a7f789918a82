use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{out_of_vocabulary_filter, split_folds, Corpus, Document, OovStats};
use crate::error::{Error, Result};
use crate::eval::coherence::{mixed_coherence, CoherenceParams};
use crate::eval::{classify, perplexity, FoldInConfig};
use crate::exec::{derive_seed, Execution};
use crate::model::{Hyperparameters, TrainedModel, Variant};
use crate::sampler;
use crate::termhood::partition_vocabulary;

pub const DEFAULT_TOP_K: usize = 10;

const TRAIN_STREAM: u64 = 0x7124;
const EVAL_STREAM: u64 = 0xE7A1;

/// Metrics of one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub variant: Variant,
    pub threshold: Option<f64>,
    pub gamma: Option<f64>,
    pub accuracy: f64,
    pub perplexity: f64,
    pub coherence: Vec<f64>,
    pub coherence_mean: f64,
    pub union_sizes: Vec<usize>,
    pub missing_coherence_words: usize,
    pub test_documents: usize,
    pub test_tokens: usize,
    pub oov: OovStats,
    pub document_accuracies: Vec<f64>,
}

/// Means over folds for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub variant: Variant,
    pub folds: usize,
    pub accuracy: f64,
    pub coherence: f64,
    pub perplexity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: Option<String>,
    pub folds: Vec<FoldResult>,
    pub summary: Vec<ModelSummary>,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record<'a> {
    Config { config: &'a str },
    Fold(&'a FoldResult),
    Summary(&'a ModelSummary),
}

impl EvalReport {
    pub fn from_folds(folds: Vec<FoldResult>, config: Option<String>) -> Self {
        let mut summary = Vec::new();
        let mut variants: Vec<Variant> = Vec::new();
        for f in &folds {
            if !variants.contains(&f.variant) {
                variants.push(f.variant);
            }
        }
        for variant in variants {
            let mine: Vec<&FoldResult> = folds.iter().filter(|f| f.variant == variant).collect();
            let n = mine.len() as f64;
            let mean = |get: fn(&FoldResult) -> f64| mine.iter().map(|f| get(f)).sum::<f64>() / n;
            summary.push(ModelSummary {
                variant,
                folds: mine.len(),
                accuracy: mean(|f| f.accuracy),
                coherence: mean(|f| f.coherence_mean),
                perplexity: mean(|f| f.perplexity),
            });
        }
        Self { config, folds, summary }
    }

    /// Line-delimited JSON: the configuration, one record per fold and
    /// model, then one summary record per model.
    pub fn write_jsonl<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        let mut line = |r: Record<'_>| -> Result<()> {
            let json = serde_json::to_string(&r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            writeln!(out, "{json}").map_err(|e| Error::io("<report>", e))
        };
        if let Some(config) = &self.config {
            line(Record::Config { config })?;
        }
        for f in &self.folds {
            line(Record::Fold(f))?;
        }
        for s in &self.summary {
            line(Record::Summary(s))?;
        }
        Ok(())
    }

    /// `model  Acc  TC  Perpl`, one row per model, preceded by the
    /// configuration as `#` comment lines.
    pub fn write_summary_tsv<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        if let Some(config) = &self.config {
            for l in config.lines() {
                writeln!(out, "# {l}")?;
            }
        }
        writeln!(out, "model\tAcc\tTC\tPerpl")?;
        for s in &self.summary {
            writeln!(
                out,
                "{}\t{:.4}\t{:.4}\t{:.2}",
                s.variant.name(),
                s.accuracy,
                s.coherence,
                s.perplexity
            )?;
        }
        Ok(())
    }
}

/// Expresses `test` in the model's vocabulary and collection order. OOV
/// tokens are dropped; documents left empty are excluded and counted.
pub fn project_test(model: &TrainedModel, test: &Corpus) -> Result<(Vec<Document>, OovStats)> {
    let map = test
        .collections()
        .iter()
        .map(|name| {
            model
                .collections
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| Error::UnknownCollection(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = OovStats::default();
    let mut docs = Vec::new();
    for doc in test.documents() {
        let mut f = out_of_vocabulary_filter(doc, test.vocabulary(), &model.vocabulary);
        f.document.collection = map[doc.collection];
        stats.removed_tokens += f.removed;
        stats.kept_tokens += f.document.tokens.len();
        if f.is_empty() {
            stats.empty_documents += 1;
        } else {
            docs.push(f.document);
        }
    }
    Ok((docs, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub fold_in: FoldInConfig,
    pub coherence: CoherenceParams,
    pub top_k: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            fold_in: FoldInConfig::default(),
            coherence: CoherenceParams::default(),
            top_k: DEFAULT_TOP_K,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

/// Accuracy, perplexity and mixed coherence of `model` on `test`.
/// Coherence is measured against `reference`.
pub fn evaluate_model(
    model: &TrainedModel,
    test: &Corpus,
    reference: &Corpus,
    fold: usize,
    opts: &EvalOptions,
) -> Result<FoldResult> {
    let (docs, oov) = project_test(model, test)?;
    if docs.is_empty() {
        return Err(Error::NoTokens);
    }
    let classes = classify(model, &docs, &opts.fold_in, opts.seed, opts.exec)?;
    let perp = perplexity(model, &docs, &opts.fold_in, opts.seed, opts.exec)?;
    let coh = mixed_coherence(model, opts.top_k, reference, &opts.coherence, opts.exec)?;
    Ok(FoldResult {
        fold,
        variant: model.variant(),
        threshold: model.state.partition().map(|p| p.threshold),
        gamma: model.gamma(),
        accuracy: classes.accuracy,
        perplexity: perp.value,
        coherence: coh.per_topic,
        coherence_mean: coh.mean,
        union_sizes: coh.union_sizes,
        missing_coherence_words: coh.missing_words,
        test_documents: docs.len(),
        test_tokens: perp.tokens,
        oov,
        document_accuracies: classes.documents.iter().map(|d| d.accuracy).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub hyper: Hyperparameters,
    pub variants: Vec<Variant>,
    /// Entropy threshold for the vocabulary partition; hapax threshold when `None`.
    pub threshold: Option<f64>,
    pub eval: EvalOptions,
    pub config: Option<String>,
}

impl CvConfig {
    pub fn new(hyper: Hyperparameters) -> Self {
        Self {
            folds: 5,
            hyper,
            variants: vec![Variant::Entropy, Variant::CcLda],
            threshold: None,
            eval: EvalOptions::default(),
            config: None,
        }
    }
}

/// Trains every variant on every fold's training part and evaluates it on
/// the held-out part. Fold/variant jobs run on the execution pool; each job
/// trains a single chain sequentially.
pub fn cross_validate(corpus: &Corpus, cfg: &CvConfig, reference: Option<&Corpus>) -> Result<EvalReport> {
    cfg.hyper.validate()?;
    cfg.eval.fold_in.validate()?;
    let folds = split_folds(corpus, cfg.folds, cfg.eval.seed)?;
    let jobs: Vec<(usize, Variant)> = (0..folds.len())
        .flat_map(|f| cfg.variants.iter().map(move |&v| (f, v)))
        .collect();
    let results = cfg.eval.exec.map(&jobs, |_, &(f, variant)| -> Result<FoldResult> {
        let fold = &folds[f];
        let mut hyper = cfg.hyper.clone();
        hyper.seed = derive_seed(cfg.hyper.seed, TRAIN_STREAM, f as u64);
        let partition = match variant {
            Variant::Entropy => Some(partition_vocabulary(&fold.train, cfg.threshold)?),
            Variant::CcLda => None,
        };
        let model = sampler::train(&fold.train, &hyper, variant, partition.as_ref())?;
        let mut opts = cfg.eval;
        opts.seed = derive_seed(cfg.eval.seed, EVAL_STREAM, f as u64);
        evaluate_model(&model, &fold.test, reference.unwrap_or(&fold.train), f, &opts)
    });
    let folds = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_folds(folds, cfg.config.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RawDocument;

    fn corpus() -> Corpus {
        let mut raw = Vec::new();
        for i in 0..6 {
            raw.push(RawDocument::new(format!("p{i}"), "pat", ["claim", "device", "method", "apparatus", "claim"]));
            raw.push(RawDocument::new(format!("s{i}"), "sci", ["study", "method", "result", "approach", "study"]));
        }
        Corpus::from_raw(raw, None).unwrap()
    }

    fn cfg() -> CvConfig {
        let mut cfg = CvConfig::new(Hyperparameters::new(2).with_seed(3).with_schedule(20, 2, 2));
        cfg.folds = 3;
        cfg.eval.top_k = 3;
        cfg
    }

    #[test]
    fn aggregates_are_fold_means() {
        let report = cross_validate(&corpus(), &cfg(), None).unwrap();
        assert_eq!(report.folds.len(), 6);
        for s in &report.summary {
            let mine: Vec<_> = report.folds.iter().filter(|f| f.variant == s.variant).collect();
            let acc = mine.iter().map(|f| f.accuracy).sum::<f64>() / 3.0;
            assert!((s.accuracy - acc).abs() < 1e-12);
            assert!(s.perplexity >= 1.0);
        }
        for f in &report.folds {
            assert!(f.document_accuracies.iter().all(|a| (0.0..=1.0).contains(a)));
        }
    }

    #[test]
    fn execution_modes_agree() {
        let mut seq = cfg();
        seq.eval.exec = Execution::Sequential;
        let a = cross_validate(&corpus(), &seq, None).unwrap();
        let b = cross_validate(&corpus(), &cfg(), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projection_drops_oov_and_empty_docs() {
        let report_corpus = corpus();
        let model = sampler::train(
            &report_corpus,
            &Hyperparameters::new(2).with_schedule(2, 1, 1),
            Variant::CcLda,
            None,
        )
        .unwrap();
        let test = Corpus::from_raw(
            vec![
                RawDocument::new("t0", "sci", ["study", "unseen"]),
                RawDocument::new("t1", "pat", ["novel"]),
            ],
            None,
        )
        .unwrap();
        let (docs, oov) = project_test(&model, &test).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].collection, 1);
        assert_eq!(oov.removed_tokens, 2);
        assert_eq!(oov.empty_documents, 1);
    }

    #[test]
    fn summary_tsv_layout() {
        let mut report = cross_validate(&corpus(), &cfg(), None).unwrap();
        report.config = Some("topics = 2".into());
        let mut out = Vec::new();
        report.write_summary_tsv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# topics = 2");
        assert_eq!(lines[1], "model\tAcc\tTC\tPerpl");
        assert!(lines[2].starts_with("entropy\t"));
        assert!(lines[3].starts_with("cclda\t"));
        let mut jsonl = Vec::new();
        report.write_jsonl(&mut jsonl).unwrap();
        let first: serde_json::Value = serde_json::from_slice(jsonl.split(|&b| b == b'\n').next().unwrap()).unwrap();
        assert_eq!(first["record"], "config");
    }
}
