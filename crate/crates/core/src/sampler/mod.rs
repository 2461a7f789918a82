//! Collapsed Gibbs samplers and the shared training schedule.
//!
//! A chain runs `burn_in` sweeps, then keeps the point estimates of every
//! `lag`-th sweep until `samples` have been collected, and averages them.
//! Topics are not relabeled within a chain, so the averaged distributions
//! stay aligned. Each chain is single-threaded and fully determined by the
//! seed; the scan order is documents in corpus order, tokens in document
//! order.

pub mod cclda;
pub mod entropy;
mod likelihood;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use likelihood::log_joint;

use crate::corpus::Corpus;
use crate::error::Result;
use crate::model::{point_estimates, Hyperparameters, IterationRecord, ModelState, TrainedModel, Variant};
use crate::termhood::VocabularyPartition;

/// Inverse-CDF draw from unnormalized cumulative weights.
#[inline]
pub(crate) fn sample_cumulative<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = cumulative[cumulative.len() - 1];
    let u = rng.random::<f64>() * total;
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// One full sweep with the sampler matching the state's variant.
pub fn sweep<R: Rng + ?Sized>(state: &mut ModelState, corpus: &Corpus, rng: &mut R) -> Result<()> {
    match state.variant() {
        Variant::Entropy => entropy::gibbs_step(state, corpus, rng),
        Variant::CcLda => cclda::gibbs_step_joint(state, corpus, rng),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    /// Compute the training log-likelihood every n sweeps (0 disables).
    pub log_likelihood_every: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            log_likelihood_every: 1,
        }
    }
}

/// Runs one chain and returns the final state with averaged estimates.
/// `observer` is called for every recorded iteration.
pub fn train_with(
    corpus: &Corpus,
    hyper: &Hyperparameters,
    variant: Variant,
    partition: Option<&VocabularyPartition>,
    options: TrainOptions,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<TrainedModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut state = ModelState::initialize(corpus, hyper, variant, partition, &mut rng)?;
    let start = Instant::now();
    let mut trace = Vec::new();
    let mut averaged = None;
    for iteration in 1..=hyper.total_sweeps() {
        sweep(&mut state, corpus, &mut rng)?;
        let every = options.log_likelihood_every;
        if every > 0 && (iteration % every == 0 || iteration == hyper.total_sweeps()) {
            let record = IterationRecord {
                iteration,
                elapsed_secs: start.elapsed().as_secs_f64(),
                log_likelihood: log_joint(&state),
            };
            observer(&record);
            trace.push(record);
        }
        if iteration > hyper.burn_in && (iteration - hyper.burn_in).is_multiple_of(hyper.lag) {
            let current = point_estimates(&state);
            match averaged.as_mut() {
                None => averaged = Some(current),
                Some(sum) => crate::model::Estimates::add_assign(sum, &current),
            }
        }
    }
    let mut estimates = averaged.expect("samples >= 1");
    if hyper.samples > 1 {
        estimates.scale(1.0 / hyper.samples as f64);
    }
    Ok(TrainedModel {
        state,
        estimates,
        vocabulary: corpus.vocabulary().clone(),
        collections: corpus.collections().to_vec(),
        trace,
        config: None,
    })
}

pub fn train(
    corpus: &Corpus,
    hyper: &Hyperparameters,
    variant: Variant,
    partition: Option<&VocabularyPartition>,
) -> Result<TrainedModel> {
    train_with(corpus, hyper, variant, partition, TrainOptions::default(), &mut |_| {})
}
