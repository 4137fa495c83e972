//! Likelihood evaluation: exact for small models, annealed importance
//! sampling (AIS) for the partition function otherwise.
//!
//! AIS anneals from a base RBM with zero weights and zero hidden biases but
//! the target's visible biases (so the base is a product of Bernoullis with
//! analytic `log Z`) to the target, scaling `w` and `c` by `β` along a
//! linear schedule. Each intermediate distribution gets one Gibbs sweep.

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{RbmError, Result};
use crate::model::{mean_g_value, RbmParams};
use crate::numeric::{log_mean_exp, log_sum_exp, logistic, softplus};
use crate::sampling::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AisConfig {
    pub particles: usize,
    /// Number of annealing steps; the β grid has `intermediate + 1` points
    /// from 0 to 1 inclusive.
    pub intermediate: usize,
}

impl Default for AisConfig {
    fn default() -> Self {
        Self {
            particles: 100,
            intermediate: 10_000,
        }
    }
}

impl AisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(RbmError::invalid("AIS needs at least one particle"));
        }
        if self.intermediate == 0 {
            return Err(RbmError::invalid("AIS needs at least one intermediate distribution"));
        }
        Ok(())
    }

    /// Linear inverse-temperature grid `β_k = k / intermediate`.
    pub fn betas(&self) -> Vec<f64> {
        (0..=self.intermediate)
            .map(|k| k as f64 / self.intermediate as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisResult {
    pub log_z_estimate: f64,
    pub base_log_z: f64,
    pub log_weights: Vec<f64>,
    /// Effective sample size `(Σw)² / Σw²`, in `[1, particles]`.
    pub ess: f64,
}

/// `log Z` of the base distribution: `n ln 2 + Σ_j softplus(b_j)`.
pub fn base_log_partition(params: &RbmParams) -> f64 {
    params.n_hidden() as f64 * std::f64::consts::LN_2 + params.b.iter().map(|&b| softplus(b)).sum::<f64>()
}

fn anneal_particle(params: &RbmParams, betas: &[f64], rng: &mut RngStream) -> f64 {
    let m = params.n_visible();
    let mut v: Array1<f64> = params
        .b
        .iter()
        .map(|&b| f64::from(u8::from(rng.bernoulli(logistic(b)))))
        .collect();
    let mut h = Array1::<f64>::zeros(params.n_hidden());
    let mut input = params.w.dot(&v) + &params.c;
    let mut log_w = 0.0;
    let last = betas.len() - 1;
    for k in 1..=last {
        let (lo, hi) = (betas[k - 1], betas[k]);
        log_w += input.iter().map(|&a| softplus(hi * a) - softplus(lo * a)).sum::<f64>();
        if k == last {
            break;
        }
        for (hi_unit, &a) in h.iter_mut().zip(&input) {
            *hi_unit = f64::from(u8::from(rng.bernoulli(logistic(hi * a))));
        }
        let vis = params.w.t().dot(&h);
        for j in 0..m {
            v[j] = f64::from(u8::from(rng.bernoulli(logistic(hi * vis[j] + params.b[j]))));
        }
        input = params.w.dot(&v) + &params.c;
    }
    log_w
}

/// AIS estimate of `log Z_θ`. Particle `k` draws from `rng.fork(k)`, so the
/// result does not depend on thread scheduling.
pub fn ais_log_partition(params: &RbmParams, cfg: &AisConfig, rng: &RngStream) -> Result<AisResult> {
    cfg.validate()?;
    params.validate()?;
    let betas = cfg.betas();
    let log_weights: Vec<f64> = (0..cfg.particles)
        .into_par_iter()
        .map(|k| anneal_particle(params, &betas, &mut rng.fork(k as u64)))
        .collect();
    if let Some((k, w)) = log_weights.iter().enumerate().find(|(_, w)| !w.is_finite()) {
        return Err(RbmError::NonFinite(format!("AIS particle {k} has log-weight {w}")));
    }
    let base_log_z = base_log_partition(params);
    let log_z_estimate = base_log_z + log_mean_exp(&log_weights);
    let doubled: Vec<f64> = log_weights.iter().map(|w| 2.0 * w).collect();
    let ess = (2.0 * log_sum_exp(&log_weights) - log_sum_exp(&doubled)).exp();
    Ok(AisResult {
        log_z_estimate,
        base_log_z,
        log_weights,
        ess: ess.clamp(1.0, cfg.particles as f64),
    })
}

/// Average log-likelihood `mean_v g(θ, v) − log_z`, for a `log_z` from
/// either the exact or the AIS path.
pub fn estimate_atll(params: &RbmParams, data: &BinaryDataset, log_z: f64) -> Result<f64> {
    Ok(mean_g_value(params, data)? - log_z)
}
