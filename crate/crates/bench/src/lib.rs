//! Shared fixtures for the benchmarks.

use rbm_core::data::{bars_stripes_dataset, BarsStripesMode};
use rbm_core::{Algorithm, BinaryVector, OptimizerState, RbmParams, RngStream, TrainConfig};

/// Random model of the given shape with N(0, `sd`) parameters.
pub fn random_model(n_visible: usize, n_hidden: usize, sd: f64, seed: u64) -> RbmParams {
    RbmParams::random_normal(n_visible, n_hidden, sd, &mut RngStream::new(seed))
}

/// `count` uniformly random binary rows of length `dim`.
pub fn random_batch(dim: usize, count: usize, seed: u64) -> Vec<BinaryVector> {
    let mut rng = RngStream::new(seed);
    (0..count)
        .map(|_| BinaryVector::from_bools((0..dim).map(|_| rng.bernoulli(0.5))))
        .collect()
}

/// The sixteen distinct 3x3 bars-and-stripes patterns.
pub fn bars3_batch() -> Vec<BinaryVector> {
    bars_stripes_dataset(3, BarsStripesMode::Distinct)
        .unwrap()
        .rows()
        .to_vec()
}

/// Optimizer state plus the bars3 configuration for `algorithm`.
pub fn bars3_state(algorithm: Algorithm) -> (OptimizerState, TrainConfig) {
    let state = OptimizerState::new(random_model(9, 4, 0.1, 7), RngStream::new(11));
    (state, TrainConfig::bars3(algorithm))
}
