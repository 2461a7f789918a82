//! ccLDA baseline: (z, x) sampled jointly for every token.
//!
//! With `n_zc = n_zc^¬x + n_zc^x` the tokens of collection c in topic z:
//!
//! ```text
//! (z, x=0) ∝ (n_dz + α_z) (n_zc^¬x + γ0) / (n_zc + γ0 + γ1) (n_zw^φ + β) / (n_z^φ + V β)
//! (z, x=1) ∝ (n_dz + α_z) (n_zc^x  + γ1) / (n_zc + γ0 + γ1) (n_zcw^σ + δ) / (n_zc^σ + V δ)
//! ```
//!
//! φ and σ both range over the full vocabulary.

use rand::Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{Hyperparameters, ModelState, TrainedModel, Variant};
use crate::sampler::sample_cumulative;

pub fn gibbs_step_joint<R: Rng + ?Sized>(state: &mut ModelState, corpus: &Corpus, rng: &mut R) -> Result<()> {
    if state.variant != Variant::CcLda {
        return Err(Error::InvalidArgument("ccLDA sampler needs a ccLDA-variant state".into()));
    }
    state.check_corpus(corpus)?;
    let t = state.topics();
    let h = &state.hyper;
    let alpha = h.alpha.clone();
    let (beta, delta, g0, g1) = (h.beta, h.delta, h.gamma0, h.gamma1);
    let v = state.vocab_size();
    let phi_norm = v as f64 * beta;
    let sigma_norm = v as f64 * delta;
    // [0, T) holds x = 0, [T, 2T) holds x = 1
    let mut cum = vec![0.0; 2 * t];

    let mut i = 0;
    for (d, doc) in corpus.documents().iter().enumerate() {
        let c = doc.collection;
        for &w in &doc.tokens {
            state.decrement(d, c, w, state.z[i] as usize, state.x[i]);

            let wi = w as usize;
            let ndz = &state.n_dz[d * t..(d + 1) * t];
            let phi_row = &state.n_phi[wi * t..(wi + 1) * t];
            let sigma_row = &state.n_sigma[(c * v + wi) * t..(c * v + wi + 1) * t];
            let notx = &state.n_notx[c * t..(c + 1) * t];
            let on = &state.n_sigma_total[c * t..(c + 1) * t];
            let phi_tot = &state.n_phi_total;

            let mut acc = 0.0;
            for z in 0..t {
                let doc_term = ndz[z] as f64 + alpha[z];
                let switch_norm = notx[z] as f64 + on[z] as f64 + g0 + g1;
                acc += doc_term * (notx[z] as f64 + g0) / switch_norm * (phi_row[z] as f64 + beta)
                    / (phi_tot[z] as f64 + phi_norm);
                cum[z] = acc;
            }
            for z in 0..t {
                let doc_term = ndz[z] as f64 + alpha[z];
                let switch_norm = notx[z] as f64 + on[z] as f64 + g0 + g1;
                acc += doc_term * (on[z] as f64 + g1) / switch_norm * (sigma_row[z] as f64 + delta)
                    / (on[z] as f64 + sigma_norm);
                cum[t + z] = acc;
            }

            let k = sample_cumulative(&cum, rng);
            let (z, x) = (k % t, k >= t);
            state.z[i] = z as u32;
            state.x[i] = x;
            state.increment(d, c, w, z, x);
            i += 1;
        }
    }
    Ok(())
}

pub fn train(corpus: &Corpus, hyper: &Hyperparameters) -> Result<TrainedModel> {
    crate::sampler::train(corpus, hyper, Variant::CcLda, None)
}
