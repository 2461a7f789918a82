use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cli::config::SweepMode;
use crate::corpus::Corpus;
use crate::error::Result;
use crate::eval::{classify, project_test, FoldInConfig};
use crate::exec::Execution;
use crate::model::{Hyperparameters, Variant};
use crate::sampler;
use crate::termhood::{distinct_entropies, estimate_posteriors_with, hapax_threshold, partition_from_stats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub gamma: f64,
    pub specific_words: usize,
    pub accuracy: f64,
}

/// Thresholds to visit. Fast mode: `points` evenly spaced values on [0, 1]
/// plus the hapax threshold. Exact mode: every distinct word entropy.
pub fn sweep_grid(train: &Corpus, mode: SweepMode, points: usize, exec: Execution) -> Result<Vec<f64>> {
    let mut grid: Vec<f64> = match mode {
        SweepMode::Fast => {
            let mut g: Vec<f64> = match points {
                0 => Vec::new(),
                1 => vec![1.0],
                n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
            };
            g.push(hapax_threshold(train.num_collections())?);
            g
        }
        SweepMode::Exact => {
            let stats = estimate_posteriors_with(train, exec);
            distinct_entropies(&stats).into_iter().map(|(h, _)| h).collect()
        }
    };
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Trains the entropy model on `train` once per threshold and classifies
/// `test`. Rows are sorted by γ, then threshold.
pub fn run_sweep(
    train: &Corpus,
    test: &Corpus,
    thresholds: &[f64],
    hyper: &Hyperparameters,
    fold_in: &FoldInConfig,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let stats = estimate_posteriors_with(train, exec);
    let rows = exec.map(thresholds, |_, &t| -> Result<SweepRow> {
        let partition = partition_from_stats(train, &stats, Some(t))?;
        let model = sampler::train(train, hyper, Variant::Entropy, Some(&partition))?;
        let (docs, _) = project_test(&model, test)?;
        let accuracy = classify(&model, &docs, fold_in, seed, Execution::Sequential)?.accuracy;
        Ok(SweepRow {
            threshold: t,
            gamma: partition.gamma,
            specific_words: partition.num_specific(),
            accuracy,
        })
    });
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.threshold.total_cmp(&b.threshold)));
    Ok(rows)
}

/// CSV with `#` comment lines carrying the configuration.
pub fn write_sweep_csv<W: Write + ?Sized>(rows: &[SweepRow], config: Option<&str>, out: &mut W) -> std::io::Result<()> {
    if let Some(config) = config {
        for l in config.lines() {
            writeln!(out, "# {l}")?;
        }
    }
    writeln!(out, "threshold,gamma,accuracy")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.threshold, r.gamma, r.accuracy)?;
    }
    Ok(())
}
