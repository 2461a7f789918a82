//! Command-line interface: `train`, `eval`, `report`, `rank`, `sweep` and
//! `histogram`.
//!
//! Every command reads an optional TOML configuration, applies flag
//! overrides, and echoes the effective configuration into its outputs as `#`
//! comment lines (TSV/CSV), a leading record (JSONL) or the model file's
//! metadata.

pub mod config;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{Config, SweepMode};
pub use sweep::{run_sweep, sweep_grid, write_sweep_csv, SweepRow};

use crate::corpus::{split_folds, Corpus};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, evaluate_model, EvalReport};
use crate::exec::Execution;
use crate::model::{load_model, save_model, top_words, IterationRecord, Variant};
use crate::sampler::{train_with, TrainOptions};
use crate::termhood::{estimate_posteriors_with, histogram_from_stats, partition_from_stats, write_rank_tsv};

#[derive(Debug, Parser)]
#[command(name = "cctm", version, about = "Cross-collection topic models: entropy-partitioned and ccLDA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it with a JSONL progress log.
    Train(TrainArgs),
    /// Evaluate a model on a test corpus, or cross-validate both variants.
    Eval(EvalArgs),
    /// Top words of every topic.
    Report(ReportArgs),
    /// Word entropies and termhood, sorted by termhood.
    Rank(CorpusArgs),
    /// Classification accuracy across entropy thresholds.
    Sweep(SweepArgs),
    /// Histogram of word entropies.
    Histogram(HistogramArgs),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Training corpus (JSON lines with id, collection and text or tokens).
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Stopword list, one word per line.
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,
    /// Base seed for sampling, fold assignment and fold-in.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run single-threaded.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Args, Default)]
pub struct ModelOverrides {
    /// entropy or cclda.
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Number of topics.
    #[arg(long)]
    pub topics: Option<usize>,
    /// Dirichlet prior on document topic proportions.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Prior of topic 0, the background topic.
    #[arg(long)]
    pub background_alpha: Option<f64>,
    /// Dirichlet prior on collection-independent word distributions.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Dirichlet prior on collection-specific word distributions.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Beta prior weight on the collection-independent switch (ccLDA).
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Beta prior weight on the collection-specific switch (ccLDA).
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Sweeps discarded before estimates are collected.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Number of retained samples averaged into the estimates.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sweeps between retained samples.
    #[arg(long)]
    pub lag: Option<usize>,
    /// Entropy threshold of the vocabulary partition (default: hapax threshold).
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct EvalOverrides {
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Top words per distribution for coherence and reports.
    #[arg(long)]
    pub k: Option<usize>,
    /// Gibbs sweeps per held-out document.
    #[arg(long)]
    pub fold_in_iterations: Option<usize>,
    /// Final fold-in sweeps averaged into the document's topic proportions.
    #[arg(long)]
    pub fold_in_average: Option<usize>,
    /// Coherence sliding-window width.
    #[arg(long)]
    pub window: Option<usize>,
    /// Reference corpus for coherence (default: the training corpus).
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[command(flatten)]
    pub model: ModelOverrides,
    /// Model file to write.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Progress log (default: <output>.progress.jsonl).
    #[arg(long)]
    pub progress: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[command(flatten)]
    pub model_overrides: ModelOverrides,
    #[command(flatten)]
    pub eval: EvalOverrides,
    /// Trained model file.
    #[arg(long, conflicts_with = "cv", requires = "test")]
    pub model: Option<PathBuf>,
    /// Held-out corpus.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Cross-validate both variants on the training corpus.
    #[arg(long)]
    pub cv: bool,
    /// JSONL report (per-fold and summary records).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Summary TSV (default: standard output).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    /// One row per (topic, distribution, rank).
    Tsv,
    /// Side-by-side columns per topic.
    Table,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Words per distribution.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Tsv)]
    pub format: ReportFormat,
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Entropy threshold for the partition column (default: hapax threshold).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[command(flatten)]
    pub model: ModelOverrides,
    #[command(flatten)]
    pub eval: EvalOverrides,
    /// Threshold grid.
    #[arg(long, value_enum)]
    pub mode: Option<SweepMode>,
    /// Evenly spaced thresholds in fast mode.
    #[arg(long)]
    pub points: Option<usize>,
    /// CSV file (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Equal-width bins over [0, 1].
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn resolve(common: &Overrides) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(p) = &common.corpus {
        cfg.corpus = Some(p.clone());
    }
    if let Some(p) = &common.stopwords {
        cfg.stopwords = Some(p.clone());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn apply_model(cfg: &mut Config, m: &ModelOverrides) {
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = m.$field { cfg.$field = v; } )* };
    }
    set!(variant, topics, alpha, beta, delta, gamma0, gamma1, burn_in, samples, lag);
    if m.background_alpha.is_some() {
        cfg.background_alpha = m.background_alpha;
    }
    if m.threshold.is_some() {
        cfg.threshold = m.threshold;
    }
}

fn apply_eval(cfg: &mut Config, e: &EvalOverrides) {
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = e.$field { cfg.$field = v; } )* };
    }
    set!(folds, k, fold_in_iterations, fold_in_average, window);
    if let Some(r) = &e.reference {
        cfg.reference = Some(r.clone());
    }
}

fn execution(common: &Overrides) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes to `path`, or to standard output when absent.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let label = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let result = match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).and_then(|_| w.flush())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).and_then(|_| lock.flush())
        }
    };
    result.map_err(|e| Error::io(label, e))
}

fn echo_comments(out: &mut dyn Write, config: &str) -> std::io::Result<()> {
    for l in config.lines() {
        writeln!(out, "# {l}")?;
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    apply_model(&mut cfg, &args.model);
    let hyper = cfg.hyperparameters()?;
    let exec = execution(&args.common);
    let corpus = cfg.load_corpus()?;
    let partition = match cfg.variant {
        Variant::Entropy => {
            let stats = estimate_posteriors_with(&corpus, exec);
            Some(partition_from_stats(&corpus, &stats, cfg.threshold)?)
        }
        Variant::CcLda => None,
    };
    let echo = cfg.echo();

    let progress_path = args.progress.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".progress.jsonl");
        PathBuf::from(p)
    });
    let mut progress = create(&progress_path)?;
    let io_err = |e| Error::io(&progress_path, e);
    writeln!(progress, "{}", serde_json::json!({ "record": "config", "config": echo })).map_err(io_err)?;
    let mut write_error = None;
    let mut observer = |r: &IterationRecord| {
        log::debug!("iteration {} log-likelihood {:.3}", r.iteration, r.log_likelihood);
        if write_error.is_none() {
            let line = serde_json::json!({
                "record": "iteration",
                "iteration": r.iteration,
                "elapsed_secs": r.elapsed_secs,
                "log_likelihood": r.log_likelihood,
            });
            if let Err(e) = writeln!(progress, "{line}") {
                write_error = Some(e);
            }
        }
    };
    let mut model = train_with(
        &corpus,
        &hyper,
        cfg.variant,
        partition.as_ref(),
        TrainOptions::default(),
        &mut observer,
    )?;
    if let Some(e) = write_error {
        return Err(io_err(e));
    }
    progress.flush().map_err(io_err)?;
    model.config = Some(echo);
    save_model(&model, &args.output)?;

    let mut out = std::io::stdout().lock();
    let summary = match &partition {
        Some(p) => format!(
            "C\tV\tthreshold\tgamma\tT\n{}\t{}\t{:.3}\t{:.3}\t{}",
            corpus.num_collections(),
            corpus.vocab_size(),
            p.threshold,
            p.gamma,
            hyper.topics
        ),
        None => format!(
            "C\tV\tT\n{}\t{}\t{}",
            corpus.num_collections(),
            corpus.vocab_size(),
            hyper.topics
        ),
    };
    writeln!(out, "{summary}").map_err(|e| Error::io("<stdout>", e))
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    apply_model(&mut cfg, &args.model_overrides);
    apply_eval(&mut cfg, &args.eval);
    let exec = execution(&args.common);
    let reference = cfg.reference.as_deref().map(|p| cfg.load_corpus_at(p)).transpose()?;

    let report = if args.cv {
        let corpus = cfg.load_corpus()?;
        cross_validate(&corpus, &cfg.cv_config(exec)?, reference.as_ref())?
    } else {
        let (Some(model_path), Some(test_path)) = (&args.model, &args.test) else {
            return Err(Error::InvalidArgument("eval needs --model and --test, or --cv".into()));
        };
        let model = load_model(model_path)?;
        let test = cfg.load_corpus_at(test_path)?;
        let reference = match reference {
            Some(r) => r,
            None => cfg.load_corpus_at(&training_corpus_path(&cfg, model.config.as_deref())?)?,
        };
        let result = evaluate_model(&model, &test, &reference, 0, &cfg.eval_options(exec)?)?;
        let mut echo = cfg.echo();
        if let Some(model_cfg) = &model.config {
            echo.push_str("\n[model]\n");
            echo.push_str(model_cfg);
        }
        EvalReport::from_folds(vec![result], Some(echo))
    };

    if let Some(path) = &args.output {
        let mut w = create(path)?;
        report.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    with_output(args.summary.as_deref(), |out| report.write_summary_tsv(out))
}

/// Coherence reference for a stored model: the configured corpus, or the
/// corpus recorded in the model's own configuration.
fn training_corpus_path(cfg: &Config, model_config: Option<&str>) -> Result<PathBuf> {
    if let Some(p) = &cfg.corpus {
        return Ok(p.clone());
    }
    model_config
        .and_then(|text| Config::from_toml(text).ok())
        .and_then(|c| c.corpus)
        .ok_or_else(|| {
            Error::InvalidArgument("coherence needs a reference corpus: pass --reference or --corpus".into())
        })
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let report = top_words(&model, args.k)?;
    with_output(args.output.as_deref(), |out| {
        if let Some(c) = &model.config {
            echo_comments(out, c)?;
        }
        match args.format {
            ReportFormat::Tsv => report.write_tsv(out),
            ReportFormat::Table => report.write_table(out),
        }
    })
}

fn cmd_rank(args: &CorpusArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    if args.threshold.is_some() {
        cfg.threshold = args.threshold;
    }
    let corpus = cfg.load_corpus()?;
    let stats = estimate_posteriors_with(&corpus, execution(&args.common));
    let partition = partition_from_stats(&corpus, &stats, cfg.threshold)?;
    with_output(args.output.as_deref(), |out| {
        echo_comments(out, &cfg.echo())?;
        write_rank_tsv(out, &corpus, &stats, &partition)
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = resolve(&args.common)?;
    apply_model(&mut cfg, &args.model);
    apply_eval(&mut cfg, &args.eval);
    if let Some(m) = args.mode {
        cfg.sweep_mode = m;
    }
    if let Some(p) = args.points {
        cfg.sweep_points = p;
    }
    let exec = execution(&args.common);
    let corpus = cfg.load_corpus()?;
    let rows = sweep_on_first_fold(&corpus, &cfg, exec)?;
    with_output(args.output.as_deref(), |out| write_sweep_csv(&rows, Some(&cfg.echo()), out))
}

/// The sweep of `cfg` trained on all folds but the first and evaluated on
/// the first.
pub fn sweep_on_first_fold(corpus: &Corpus, cfg: &Config, exec: Execution) -> Result<Vec<SweepRow>> {
    let hyper = cfg.hyperparameters()?;
    let fold_in = cfg.fold_in()?;
    let folds = split_folds(corpus, cfg.folds, cfg.seed)?;
    let fold = &folds[0];
    let grid = sweep_grid(&fold.train, cfg.sweep_mode, cfg.sweep_points, exec)?;
    log::info!("sweeping {} thresholds", grid.len());
    run_sweep(&fold.train, &fold.test, &grid, &hyper, &fold_in, cfg.seed, exec)
}

fn cmd_histogram(args: &HistogramArgs) -> Result<()> {
    let cfg = resolve(&args.common)?;
    if args.bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let corpus = cfg.load_corpus()?;
    let stats = estimate_posteriors_with(&corpus, execution(&args.common));
    let hist = histogram_from_stats(corpus.num_collections(), &stats, args.bins)?;
    let n = hist.bins.len();
    with_output(args.output.as_deref(), |out| {
        echo_comments(out, &cfg.echo())?;
        writeln!(out, "# hapax_threshold = {}", hist.hapax_threshold)?;
        writeln!(out, "# words_at_hapax = {}", hist.at_hapax)?;
        writeln!(out, "# modal_entropy = {} ({} words)", hist.mode.0, hist.mode.1)?;
        writeln!(out, "bin_start\tbin_end\twords")?;
        for (i, count) in hist.bins.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}", i as f64 / n as f64, (i + 1) as f64 / n as f64, count)?;
        }
        Ok(())
    })
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Report(a) => cmd_report(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Histogram(a) => cmd_histogram(a),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
