//! Cross-collection topic modeling.
//!
//! Two collapsed Gibbs samplers share one state representation:
//!
//! * the entropy-based model, which splits the vocabulary once, before
//!   sampling, into collection-specific words (drawn only from the
//!   per-collection distributions σ) and collection-independent words (drawn
//!   only from the shared per-topic distributions φ), using the normalized
//!   entropy of each word's smoothed collection posterior;
//! * ccLDA, which samples the specific/independent switch for every token.
//!
//! Evaluation covers fold-in classification accuracy, held-out perplexity
//! and (mixed) C_V topic coherence.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod exec;
pub mod model;
pub mod sampler;
pub mod synthetic;
pub mod termhood;

pub use error::{Error, Result};
