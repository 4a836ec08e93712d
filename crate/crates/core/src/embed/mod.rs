//! Skipgram with negative sampling, optionally regularized by an L2 pull
//! between constrained word pairs.
//!
//! A word's final representation is the sum of its target (`W`) and context
//! (`C`) rows.

mod model;
mod objective;
mod train;
mod vocab;

pub use model::{EmbeddingModel, Matrix, WordVectors};
pub use objective::{
    constraint_gradient, constraint_penalty, log_sigmoid, pair_gradient, pair_loss, sigmoid, PairGradient,
};
pub use train::{constraint_step, sgd_step, train, train_lines, NegativeSampler, TrainReport};
pub use vocab::{build_vocab, EncodedCorpus, Vocabulary};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training hyperparameters. Defaults: 300 dimensions, window 5, 5
/// negatives, no subsampling, lambda 0.01; learning rate, epochs and noise
/// exponent are word2vec-style choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub dim: usize,
    pub window: usize,
    pub negative: usize,
    /// Subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub lambda: f64,
    /// Initial learning rate, decayed linearly to `1e-4 * lr`.
    pub lr: f64,
    pub epochs: usize,
    /// Exponent applied to unigram counts for the noise distribution.
    pub noise_power: f64,
    pub min_count: u64,
    /// Sample the effective window uniformly from `1..=window` per center.
    pub dynamic_window: bool,
    /// Most constrained neighbors used per center occurrence.
    pub neighbor_cap: usize,
    /// Also pull each neighbor toward the center word.
    pub symmetric_constraints: bool,
    pub threads: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 300,
            window: 5,
            negative: 5,
            subsample: 0.0,
            lambda: 0.01,
            lr: 0.025,
            epochs: 5,
            noise_power: 0.75,
            min_count: 1,
            dynamic_window: true,
            neighbor_cap: 16,
            symmetric_constraints: false,
            threads: 1,
            seed: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if self.window == 0 {
            return bad("window must be positive".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be positive".into());
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be a finite non-negative number, got {}", self.lambda));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        if self.subsample.is_nan() || self.subsample < 0.0 {
            return bad(format!("subsample threshold must be non-negative, got {}", self.subsample));
        }
        if !self.noise_power.is_finite() {
            return bad("noise power must be finite".into());
        }
        Ok(())
    }
}
