//! Both samplers against exhaustive enumeration of the collapsed posterior
//! on a 2-document, 6-token, V = 4, T = 2, C = 2 instance.
//!
//! The oracle computes the collapsed joint directly from rising factorials,
//! `Γ(n + a) / Γ(a) = a (a + 1) ... (a + n - 1)`, over every assignment, and
//! never touches the crate's count tables or likelihood code.

use cctm::corpus::{Corpus, RawDocument};
use cctm::model::{init_state, Hyperparameters, Variant};
use cctm::sampler::{cclda, entropy};
use cctm::termhood::partition_vocabulary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const T: usize = 2;
const ALPHA: [f64; T] = [0.8, 0.4];
const BETA: f64 = 0.3;
const DELTA: f64 = 0.2;
const GAMMA0: f64 = 1.0;
const GAMMA1: f64 = 0.7;

fn rising(a: f64, n: usize) -> f64 {
    (0..n).map(|i| a + i as f64).product()
}

struct Micro {
    corpus: Corpus,
    /// (doc, collection, word) per token in scan order
    tokens: Vec<(usize, usize, usize)>,
}

fn micro() -> Micro {
    // a, b occur in both collections; c only in the first, d only in the second
    let raw = vec![
        RawDocument::new("d0", "first", ["a", "c", "b"]),
        RawDocument::new("d1", "second", ["b", "d", "a"]),
    ];
    let corpus = Corpus::from_raw(raw, None).unwrap();
    let mut tokens = Vec::new();
    for (d, doc) in corpus.documents().iter().enumerate() {
        for &w in &doc.tokens {
            tokens.push((d, doc.collection, w as usize));
        }
    }
    Micro { corpus, tokens }
}

fn hyper(seed: u64) -> Hyperparameters {
    let mut h = Hyperparameters::new(T).with_seed(seed);
    h.alpha = ALPHA.to_vec();
    h.beta = BETA;
    h.delta = DELTA;
    h.gamma0 = GAMMA0;
    h.gamma1 = GAMMA1;
    h
}

/// Unnormalized collapsed joint for assignments `z` and switches `x`.
/// `phi_vocab` / `sigma_vocab` are the support sizes used for normalization.
fn collapsed_joint(
    m: &Micro,
    z: &[usize],
    x: &[bool],
    phi_vocab: usize,
    sigma_vocab: usize,
    with_switch_prior: bool,
) -> f64 {
    let v = 4;
    let mut n_dz = [[0usize; T]; 2];
    let mut n_zw = [[0usize; 4]; T];
    let mut n_zcw = [[[0usize; 4]; 2]; T];
    let mut n_x = [[[0usize; 2]; 2]; T];
    for (i, &(d, c, w)) in m.tokens.iter().enumerate() {
        n_dz[d][z[i]] += 1;
        if x[i] {
            n_zcw[z[i]][c][w] += 1;
            n_x[z[i]][c][1] += 1;
        } else {
            n_zw[z[i]][w] += 1;
            n_x[z[i]][c][0] += 1;
        }
    }
    let alpha_sum: f64 = ALPHA.iter().sum();
    let mut p = 1.0;
    for doc in &n_dz {
        let len: usize = doc.iter().sum();
        p /= rising(alpha_sum, len);
        for k in 0..T {
            p *= rising(ALPHA[k], doc[k]);
        }
    }
    for k in 0..T {
        let total: usize = n_zw[k].iter().sum();
        p /= rising(phi_vocab as f64 * BETA, total);
        for w in 0..v {
            p *= rising(BETA, n_zw[k][w]);
        }
        for c in 0..2 {
            let total: usize = n_zcw[k][c].iter().sum();
            p /= rising(sigma_vocab as f64 * DELTA, total);
            for w in 0..v {
                p *= rising(DELTA, n_zcw[k][c][w]);
            }
            if with_switch_prior {
                let [off, on] = n_x[k][c];
                p *= rising(GAMMA0, off) * rising(GAMMA1, on) / rising(GAMMA0 + GAMMA1, off + on);
            }
        }
    }
    p
}

fn max_token_l1(empirical: &[Vec<f64>], exact: &[Vec<f64>]) -> f64 {
    empirical
        .iter()
        .zip(exact)
        .map(|(e, x)| e.iter().zip(x).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub const BURN_IN: usize = 1_000;
pub const SWEEPS: usize = 50_000;

/// Max per-token L1 and joint L1 of the entropy sampler over z.
pub fn entropy_sampler_error(burn_in: usize, sweeps: usize) -> (f64, f64) {
    let m = micro();
    let partition = partition_vocabulary(&m.corpus, None).unwrap();
    let specific: Vec<bool> = (0..4u32).map(|w| partition.is_specific(w)).collect();
    let word = |s: &str| m.corpus.vocabulary().id(s).unwrap() as usize;
    assert!(specific[word("c")] && specific[word("d")]);
    assert!(!specific[word("a")] && !specific[word("b")]);
    let x: Vec<bool> = m.tokens.iter().map(|&(_, _, w)| specific[w]).collect();

    // exact per-token marginals and full joint over all T^6 assignments
    let n = m.tokens.len();
    let configs = T.pow(n as u32);
    let mut joint = vec![0.0; configs];
    for (cfg, slot) in joint.iter_mut().enumerate() {
        let z: Vec<usize> = (0..n).map(|i| (cfg / T.pow(i as u32)) % T).collect();
        *slot = collapsed_joint(&m, &z, &x, 2, 2, false);
    }
    let total: f64 = joint.iter().sum();
    joint.iter_mut().for_each(|p| *p /= total);
    let mut exact = vec![vec![0.0; T]; n];
    for (cfg, &p) in joint.iter().enumerate() {
        for (i, marg) in exact.iter_mut().enumerate() {
            marg[(cfg / T.pow(i as u32)) % T] += p;
        }
    }

    let hyper = hyper(7);
    let mut state = init_state(&m.corpus, &hyper, Variant::Entropy, Some(&partition)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..burn_in {
        entropy::gibbs_step(&mut state, &m.corpus, &mut rng).unwrap();
    }
    let mut hits = vec![vec![0.0; T]; n];
    let mut joint_hits = vec![0.0; configs];
    for _ in 0..sweeps {
        entropy::gibbs_step(&mut state, &m.corpus, &mut rng).unwrap();
        let z = state.topic_assignments();
        let mut cfg = 0;
        for i in 0..n {
            hits[i][z[i] as usize] += 1.0 / sweeps as f64;
            cfg += z[i] as usize * T.pow(i as u32);
        }
        joint_hits[cfg] += 1.0 / sweeps as f64;
    }
    let l1 = max_token_l1(&hits, &exact);
    let joint_l1: f64 = joint_hits.iter().zip(&joint).map(|(a, b)| (a - b).abs()).sum();
    (l1, joint_l1)
}

/// Max per-token L1 of the ccLDA sampler over (z, x).
pub fn cclda_sampler_error(burn_in: usize, sweeps: usize) -> f64 {
    let m = micro();
    let n = m.tokens.len();
    let states = 2 * T;
    let configs = states.pow(n as u32);
    let mut exact = vec![vec![0.0; states]; n];
    let mut total = 0.0;
    for cfg in 0..configs {
        let codes: Vec<usize> = (0..n).map(|i| (cfg / states.pow(i as u32)) % states).collect();
        let z: Vec<usize> = codes.iter().map(|&k| k % T).collect();
        let x: Vec<bool> = codes.iter().map(|&k| k >= T).collect();
        let p = collapsed_joint(&m, &z, &x, 4, 4, true);
        total += p;
        for (i, &k) in codes.iter().enumerate() {
            exact[i][k] += p;
        }
    }
    exact.iter_mut().flatten().for_each(|p| *p /= total);

    let hyper = hyper(8);
    let mut state = init_state(&m.corpus, &hyper, Variant::CcLda, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4321);
    for _ in 0..burn_in {
        cclda::gibbs_step_joint(&mut state, &m.corpus, &mut rng).unwrap();
    }
    let mut hits = vec![vec![0.0; states]; n];
    for _ in 0..sweeps {
        cclda::gibbs_step_joint(&mut state, &m.corpus, &mut rng).unwrap();
        let z = state.topic_assignments();
        let x = state.switch_assignments();
        for i in 0..n {
            let k = z[i] as usize + if x[i] { T } else { 0 };
            hits[i][k] += 1.0 / sweeps as f64;
        }
    }
    max_token_l1(&hits, &exact)
}
