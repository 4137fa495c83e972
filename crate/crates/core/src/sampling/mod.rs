//! Block Gibbs sampling, chain bookkeeping and model-sample generation.

pub mod pgm;
mod rng;

pub use rng::RngStream;

use crate::error::{RbmError, Result};
use crate::model::{hidden_input, visible_input, BinaryVector, RbmParams};
use crate::numeric::logistic;

/// Gibbs steps used to draw samples from models of large datasets.
pub const DEFAULT_SAMPLE_STEPS_LARGE: usize = 5000;
/// Gibbs steps used to draw samples from Bars & Stripes models.
pub const DEFAULT_SAMPLE_STEPS_SMALL: usize = 200;

/// Visible states of a set of Gibbs chains, one per minibatch slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    pub visible: Vec<BinaryVector>,
    pub hidden: Option<Vec<BinaryVector>>,
}

impl ChainState {
    pub fn new(visible: Vec<BinaryVector>) -> Self {
        Self { visible, hidden: None }
    }

    pub fn len(&self) -> usize {
        self.visible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visible.is_empty()
    }
}

/// Draws `h ~ p(h | v)` into `h`, one uniform per hidden unit in ascending order.
pub(crate) fn sample_hidden_into(params: &RbmParams, v: &BinaryVector, h: &mut BinaryVector, rng: &mut RngStream) {
    let input = hidden_input(params, v);
    for (i, &x) in input.iter().enumerate() {
        h.set(i, rng.bernoulli(logistic(x)));
    }
}

/// Draws `v ~ p(v | h)` into `v`, one uniform per visible unit in ascending order.
pub(crate) fn sample_visible_into(params: &RbmParams, h: &BinaryVector, v: &mut BinaryVector, rng: &mut RngStream) {
    let input = visible_input(params, h);
    for (j, &x) in input.iter().enumerate() {
        v.set(j, rng.bernoulli(logistic(x)));
    }
}

/// One sweep in place: hidden layer first, then visible.
pub(crate) fn gibbs_step(params: &RbmParams, v: &mut BinaryVector, h: &mut BinaryVector, rng: &mut RngStream) {
    sample_hidden_into(params, v, h, rng);
    sample_visible_into(params, h, v, rng);
}

/// One block Gibbs transition `v → h → v′`; consumes exactly `n + m`
/// uniforms (hidden units ascending, then visible units ascending).
pub fn gibbs_transition(
    params: &RbmParams,
    v: &BinaryVector,
    rng: &mut RngStream,
) -> Result<(BinaryVector, BinaryVector)> {
    params.check_visible(v)?;
    let mut next = v.clone();
    let mut h = BinaryVector::zeros(params.n_hidden());
    gibbs_step(params, &mut next, &mut h, rng);
    Ok((next, h))
}

/// Applies `steps` transitions starting at `v0`; `steps == 0` returns `v0`.
pub fn run_chain(params: &RbmParams, v0: &BinaryVector, steps: usize, rng: &mut RngStream) -> Result<BinaryVector> {
    params.check_visible(v0)?;
    let mut v = v0.clone();
    let mut h = BinaryVector::zeros(params.n_hidden());
    for _ in 0..steps {
        gibbs_step(params, &mut v, &mut h, rng);
    }
    Ok(v)
}

pub(crate) fn run_chain_in_place(params: &RbmParams, v: &mut BinaryVector, steps: usize, rng: &mut RngStream) {
    let mut h = BinaryVector::zeros(params.n_hidden());
    for _ in 0..steps {
        gibbs_step(params, v, &mut h, rng);
    }
}

/// Draws `count` model samples, each from an independent chain started at a
/// fair-coin visible state and run for `steps` transitions. Chain `k` uses
/// `rng.fork(k)`.
pub fn generate_samples(params: &RbmParams, count: usize, steps: usize, rng: &RngStream) -> Result<Vec<BinaryVector>> {
    if count == 0 {
        return Err(RbmError::invalid("sample count must be at least 1"));
    }
    let m = params.n_visible();
    Ok((0..count)
        .map(|k| {
            let mut chain_rng = rng.fork(k as u64);
            let mut v = BinaryVector::from_bools((0..m).map(|_| chain_rng.bernoulli(0.5)));
            run_chain_in_place(params, &mut v, steps, &mut chain_rng);
            v
        })
        .collect())
}

/// Default chain length for sample generation given the visible dimension.
pub fn default_sample_steps(n_visible: usize) -> usize {
    if n_visible <= 64 {
        DEFAULT_SAMPLE_STEPS_SMALL
    } else {
        DEFAULT_SAMPLE_STEPS_LARGE
    }
}

#[cfg(test)]
mod tests;
