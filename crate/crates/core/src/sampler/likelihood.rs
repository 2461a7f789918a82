use statrs::function::gamma::ln_gamma;

use crate::model::{ModelState, Variant};

/// `ln Γ(n + a) - ln Γ(a)` summed over the nonzero counts of a
/// Dirichlet-multinomial block, plus its normalizer.
fn dirichlet_block<'a>(counts: impl Iterator<Item = &'a u32>, prior: f64, dim: usize, total: u32) -> f64 {
    let lg_prior = ln_gamma(prior);
    let mut ll = ln_gamma(dim as f64 * prior) - ln_gamma(total as f64 + dim as f64 * prior);
    for &n in counts {
        if n > 0 {
            ll += ln_gamma(n as f64 + prior) - lg_prior;
        }
    }
    ll
}

/// Collapsed log joint `ln p(w, z)` (and `x` for ccLDA) of the current state.
pub fn log_joint(state: &ModelState) -> f64 {
    let t = state.topics();
    let h = &state.hyper;
    let c_count = state.num_collections();
    let mut ll = 0.0;

    let alpha_sum = h.alpha_sum();
    let lg_alpha: Vec<f64> = h.alpha.iter().map(|&a| ln_gamma(a)).collect();
    for d in 0..state.num_documents() {
        ll += ln_gamma(alpha_sum) - ln_gamma(state.doc_len(d) as f64 + alpha_sum);
        for z in 0..t {
            let n = state.n_dz[d * t + z];
            if n > 0 {
                ll += ln_gamma(n as f64 + h.alpha[z]) - lg_alpha[z];
            }
        }
    }

    let vp = state.phi_support.size();
    if vp > 0 {
        for z in 0..t {
            let column = state.n_phi.iter().skip(z).step_by(t);
            ll += dirichlet_block(column, h.beta, vp, state.n_phi_total[z]);
        }
    }
    let vs = state.sigma_support.size();
    if vs > 0 {
        for c in 0..c_count {
            let block = &state.n_sigma[c * vs * t..(c + 1) * vs * t];
            for z in 0..t {
                let column = block.iter().skip(z).step_by(t);
                ll += dirichlet_block(column, h.delta, vs, state.n_sigma_total[c * t + z]);
            }
        }
    }

    if state.variant == Variant::CcLda {
        let (g0, g1) = (h.gamma0, h.gamma1);
        let norm = ln_gamma(g0 + g1) - ln_gamma(g0) - ln_gamma(g1);
        for i in 0..c_count * t {
            let off = state.n_notx[i] as f64;
            let on = state.n_sigma_total[i] as f64;
            ll += norm + ln_gamma(off + g0) + ln_gamma(on + g1) - ln_gamma(off + on + g0 + g1);
        }
    }
    ll
}
