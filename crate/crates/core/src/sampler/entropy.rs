//! Sampler for the entropy-based model: x is fixed per word by the
//! vocabulary partition, only z is resampled.
//!
//! For a token of word w in document d of collection c:
//!
//! ```text
//! independent w:  p(z) ∝ (n_dz + α_z) (n_zw^φ + β) / (n_z^φ + V_φ β)
//! specific w:     p(z) ∝ (n_dz + α_z) (n_zcw^σ + δ) / (n_zc^σ + V_σ δ)
//! ```

use rand::Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{Hyperparameters, ModelState, TrainedModel, Variant};
use crate::sampler::sample_cumulative;
use crate::termhood::VocabularyPartition;

pub fn gibbs_step<R: Rng + ?Sized>(state: &mut ModelState, corpus: &Corpus, rng: &mut R) -> Result<()> {
    if state.variant != Variant::Entropy {
        return Err(Error::InvalidArgument("entropy sampler needs an entropy-variant state".into()));
    }
    state.check_corpus(corpus)?;
    let t = state.topics();
    let alpha = state.hyper.alpha.clone();
    let (beta, delta) = (state.hyper.beta, state.hyper.delta);
    let vs = state.sigma_support.size();
    let phi_norm = state.phi_support.size() as f64 * beta;
    let sigma_norm = vs as f64 * delta;
    let mut cum = vec![0.0; t];

    let mut i = 0;
    for (d, doc) in corpus.documents().iter().enumerate() {
        let c = doc.collection;
        for &w in &doc.tokens {
            let x = state.x[i];
            state.decrement(d, c, w, state.z[i] as usize, x);

            let ndz = &state.n_dz[d * t..(d + 1) * t];
            let mut acc = 0.0;
            if x {
                let s = state.sigma_support.local(w).unwrap();
                let row = &state.n_sigma[(c * vs + s) * t..(c * vs + s + 1) * t];
                let totals = &state.n_sigma_total[c * t..(c + 1) * t];
                for z in 0..t {
                    acc += (ndz[z] as f64 + alpha[z]) * (row[z] as f64 + delta) / (totals[z] as f64 + sigma_norm);
                    cum[z] = acc;
                }
            } else {
                let p = state.phi_support.local(w).unwrap();
                let row = &state.n_phi[p * t..(p + 1) * t];
                let totals = &state.n_phi_total;
                for z in 0..t {
                    acc += (ndz[z] as f64 + alpha[z]) * (row[z] as f64 + beta) / (totals[z] as f64 + phi_norm);
                    cum[z] = acc;
                }
            }

            let z = sample_cumulative(&cum, rng);
            state.z[i] = z as u32;
            state.increment(d, c, w, z, x);
            i += 1;
        }
    }
    Ok(())
}

/// Trains the entropy-based model on `corpus` with a partition computed on
/// the same corpus.
pub fn train(corpus: &Corpus, hyper: &Hyperparameters, partition: &VocabularyPartition) -> Result<TrainedModel> {
    crate::sampler::train(corpus, hyper, Variant::Entropy, Some(partition))
}
