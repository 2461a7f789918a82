use crate::corpus::WordId;
use crate::model::{ModelState, Support, Variant};

/// Point estimates of θ, φ, σ and the switch probability P(x = 1 | z, c).
///
/// Layouts mirror the count tables: `theta[d * T + z]`,
/// `phi[phi_local(w) * T + z]`, `sigma[(c * V_s + s_local(w)) * T + z]`,
/// `x_prob[c * T + z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub topics: usize,
    pub collections: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub sigma: Vec<f64>,
    pub x_prob: Vec<f64>,
    pub(crate) phi_support: Support,
    pub(crate) sigma_support: Support,
}

pub fn point_estimates(state: &ModelState) -> Estimates {
    let t = state.topics();
    let c_count = state.num_collections();
    let h = &state.hyper;
    let alpha_sum = h.alpha_sum();

    let mut theta = vec![0.0; state.n_dz.len()];
    for d in 0..state.num_documents() {
        let denom = state.doc_len(d) as f64 + alpha_sum;
        for z in 0..t {
            theta[d * t + z] = (state.n_dz[d * t + z] as f64 + h.alpha[z]) / denom;
        }
    }

    let vp = state.phi_support.size();
    let mut phi = vec![0.0; state.n_phi.len()];
    for z in 0..t {
        let denom = state.n_phi_total[z] as f64 + vp as f64 * h.beta;
        for p in 0..vp {
            phi[p * t + z] = (state.n_phi[p * t + z] as f64 + h.beta) / denom;
        }
    }

    let vs = state.sigma_support.size();
    let mut sigma = vec![0.0; state.n_sigma.len()];
    for c in 0..c_count {
        for z in 0..t {
            let denom = state.n_sigma_total[c * t + z] as f64 + vs as f64 * h.delta;
            for s in 0..vs {
                let i = (c * vs + s) * t + z;
                sigma[i] = (state.n_sigma[i] as f64 + h.delta) / denom;
            }
        }
    }

    let x_prob = match state.variant {
        Variant::Entropy => {
            let gamma = state.partition.as_ref().map_or(0.0, |p| p.gamma);
            vec![gamma; c_count * t]
        }
        Variant::CcLda => (0..c_count * t)
            .map(|i| {
                let on = state.n_sigma_total[i] as f64;
                let off = state.n_notx[i] as f64;
                (on + h.gamma1) / (on + off + h.gamma0 + h.gamma1)
            })
            .collect(),
    };

    Estimates {
        topics: t,
        collections: c_count,
        theta,
        phi,
        sigma,
        x_prob,
        phi_support: state.phi_support.clone(),
        sigma_support: state.sigma_support.clone(),
    }
}

impl Estimates {
    pub fn num_documents(&self) -> usize {
        self.theta.len() / self.topics
    }

    pub fn theta(&self, d: usize) -> &[f64] {
        &self.theta[d * self.topics..(d + 1) * self.topics]
    }

    pub fn phi_support(&self) -> &Support {
        &self.phi_support
    }

    pub fn sigma_support(&self) -> &Support {
        &self.sigma_support
    }

    /// φ_z[w]; zero when `w` is outside the φ support.
    pub fn phi(&self, z: usize, w: WordId) -> f64 {
        self.phi_support.local(w).map_or(0.0, |p| self.phi[p * self.topics + z])
    }

    /// σ_{z,c}[w]; zero when `w` is outside the σ support.
    pub fn sigma(&self, z: usize, c: usize, w: WordId) -> f64 {
        self.sigma_support
            .local(w)
            .map_or(0.0, |s| self.sigma[(c * self.sigma_support.size() + s) * self.topics + z])
    }

    pub fn x_prob(&self, z: usize, c: usize) -> f64 {
        self.x_prob[c * self.topics + z]
    }

    /// Per-topic word likelihood `(1 - P(x|z,c)) φ_z[w] + P(x|z,c) σ_{z,c}[w]`
    /// written into `out` (length T).
    pub fn topic_word_likelihoods(&self, w: WordId, c: usize, out: &mut [f64]) {
        let t = self.topics;
        let phi = self.phi_support.local(w).map(|p| &self.phi[p * t..(p + 1) * t]);
        let sigma = self
            .sigma_support
            .local(w)
            .map(|s| {
                let row = (c * self.sigma_support.size() + s) * t;
                &self.sigma[row..row + t]
            });
        let x = &self.x_prob[c * t..(c + 1) * t];
        for z in 0..t {
            let mut l = 0.0;
            if let Some(phi) = phi {
                l += (1.0 - x[z]) * phi[z];
            }
            if let Some(sigma) = sigma {
                l += x[z] * sigma[z];
            }
            out[z] = l;
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Estimates) {
        let pairs = [
            (&mut self.theta, &other.theta),
            (&mut self.phi, &other.phi),
            (&mut self.sigma, &other.sigma),
            (&mut self.x_prob, &other.x_prob),
        ];
        for (a, b) in pairs {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for v in [&mut self.theta, &mut self.phi, &mut self.sigma, &mut self.x_prob] {
            for x in v.iter_mut() {
                *x *= factor;
            }
        }
    }
}
