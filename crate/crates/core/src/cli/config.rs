use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, Corpus, CorpusFormat, LoadOptions};
use crate::error::{Error, Result};
use crate::eval::{CoherenceParams, CvConfig, EvalOptions, FoldInConfig};
use crate::exec::Execution;
use crate::model::{Hyperparameters, Variant, DEFAULT_ALPHA, DEFAULT_BACKGROUND_ALPHA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Evenly spaced thresholds plus the hapax threshold.
    #[default]
    Fast,
    /// Every distinct word entropy of the training fold.
    Exact,
}

/// Every knob of a run. Loaded from TOML, overridden by command-line flags,
/// and echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    pub min_token_len: usize,
    pub variant: Variant,
    pub topics: usize,
    pub alpha: f64,
    /// Prior of topic 0; `alpha` everywhere when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_alpha: Option<f64>,
    pub beta: f64,
    pub delta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub burn_in: usize,
    pub samples: usize,
    pub lag: usize,
    pub seed: u64,
    /// Entropy threshold of the vocabulary partition; hapax threshold when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub folds: usize,
    pub k: usize,
    pub fold_in_iterations: usize,
    pub fold_in_average: usize,
    pub window: usize,
    pub epsilon: f64,
    /// Reference corpus for coherence; the training corpus when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    pub sweep_mode: SweepMode,
    pub sweep_points: usize,
}

impl Default for Config {
    fn default() -> Self {
        let h = Hyperparameters::new(10);
        let fold_in = FoldInConfig::default();
        let coherence = CoherenceParams::default();
        Self {
            corpus: None,
            stopwords: None,
            min_token_len: 1,
            variant: Variant::Entropy,
            topics: h.topics,
            alpha: DEFAULT_ALPHA,
            background_alpha: Some(DEFAULT_BACKGROUND_ALPHA),
            beta: h.beta,
            delta: h.delta,
            gamma0: h.gamma0,
            gamma1: h.gamma1,
            burn_in: h.burn_in,
            samples: h.samples,
            lag: h.lag,
            seed: h.seed,
            threshold: None,
            folds: 5,
            k: 10,
            fold_in_iterations: fold_in.iterations,
            fold_in_average: fold_in.average_last,
            window: coherence.window,
            epsilon: coherence.epsilon,
            reference: None,
            sweep_mode: SweepMode::Fast,
            sweep_points: 25,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The effective configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hyperparameters(&self) -> Result<Hyperparameters> {
        let h = Hyperparameters {
            topics: self.topics,
            alpha: Hyperparameters::alpha_vector(self.topics, self.alpha, self.background_alpha),
            beta: self.beta,
            delta: self.delta,
            gamma0: self.gamma0,
            gamma1: self.gamma1,
            burn_in: self.burn_in,
            samples: self.samples,
            lag: self.lag,
            seed: self.seed,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn fold_in(&self) -> Result<FoldInConfig> {
        let f = FoldInConfig {
            iterations: self.fold_in_iterations,
            average_last: self.fold_in_average,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn eval_options(&self, exec: Execution) -> Result<EvalOptions> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(EvalOptions {
            fold_in: self.fold_in()?,
            coherence: CoherenceParams {
                window: self.window,
                epsilon: self.epsilon,
            },
            top_k: self.k,
            seed: self.seed,
            exec,
        })
    }

    pub fn cv_config(&self, exec: Execution) -> Result<CvConfig> {
        let mut cv = CvConfig::new(self.hyperparameters()?);
        cv.folds = self.folds;
        cv.threshold = self.threshold;
        cv.eval = self.eval_options(exec)?;
        cv.config = Some(self.echo());
        Ok(cv)
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("no corpus given (set `corpus` in the config or pass --corpus)".into()))
    }

    pub fn load_corpus_at(&self, path: &Path) -> Result<Corpus> {
        let options = LoadOptions {
            format: CorpusFormat::JsonLines,
            stopwords: self.stopwords.as_deref(),
            min_token_len: self.min_token_len,
        };
        load_corpus(path, &options)
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        self.load_corpus_at(self.corpus_path()?)
    }
}
