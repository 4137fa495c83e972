use ndarray::Array1;
use rand_distr::{Distribution, Normal};

use crate::data::BinaryDataset;
use crate::error::{check_len, RbmError, Result};
use crate::gradient::HessianDiag;
use crate::model::RbmParams;
use crate::numeric::logit;
use crate::sampling::{ChainState, RngStream};

/// Clamp applied to data means before the inverse sigmoid.
pub const DEFAULT_P_MIN: f64 = 1e-4;
/// Standard deviation of the initial weights.
pub const INIT_WEIGHT_SD: f64 = 0.01;

/// Everything a trainer carries between minibatch updates.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub params: RbmParams,
    /// PCD chains; created from the first minibatch on first use.
    pub persistent_chains: Option<ChainState>,
    /// Visible offsets μ (CG).
    pub mu: Array1<f64>,
    /// Hidden offsets λ (CG).
    pub lam: Array1<f64>,
    /// Running Hessian-diagonal average (S-DCP-D); seeded by the first
    /// fresh estimate.
    pub hess_ema: Option<HessianDiag>,
    pub rng: RngStream,
    updates: u64,
}

impl OptimizerState {
    /// Offsets start at μ = 0.5 and λ = 0.5; see [`OptimizerState::with_offsets`].
    pub fn new(params: RbmParams, rng: RngStream) -> Self {
        let (m, n) = (params.n_visible(), params.n_hidden());
        Self {
            params,
            persistent_chains: None,
            mu: Array1::from_elem(m, 0.5),
            lam: Array1::from_elem(n, 0.5),
            hess_ema: None,
            rng,
            updates: 0,
        }
    }

    pub fn with_offsets(mut self, mu: Array1<f64>, lam: Array1<f64>) -> Result<Self> {
        check_len("visible offsets", self.params.n_visible(), mu.len())?;
        check_len("hidden offsets", self.params.n_hidden(), lam.len())?;
        self.mu = mu;
        self.lam = lam;
        Ok(self)
    }

    /// Minibatch updates applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Random stream for the next minibatch update; sample `i` of the batch
    /// draws from `fork(i)` of the returned stream.
    pub(crate) fn next_update_rng(&mut self) -> RngStream {
        let r = self.rng.fork(self.updates);
        self.updates += 1;
        r
    }
}

/// Visible biases at the inverse sigmoid of the (clamped) data means,
/// hidden biases zero, weights i.i.d. `N(0, 0.01²)`.
pub fn init_params(data: &BinaryDataset, n_visible: usize, n_hidden: usize, rng: &mut RngStream) -> Result<RbmParams> {
    init_params_with(data, n_visible, n_hidden, DEFAULT_P_MIN, rng)
}

pub fn init_params_with(
    data: &BinaryDataset,
    n_visible: usize,
    n_hidden: usize,
    p_min: f64,
    rng: &mut RngStream,
) -> Result<RbmParams> {
    if data.is_empty() {
        return Err(RbmError::EmptyDataset);
    }
    check_len("dataset dimension", n_visible, data.dim())?;
    if !(0.0..0.5).contains(&p_min) {
        return Err(RbmError::invalid("p_min must lie in [0, 0.5)"));
    }
    let b: Array1<f64> = data
        .column_means()?
        .into_iter()
        .map(|p| logit(p.clamp(p_min, 1.0 - p_min)))
        .collect();
    let normal = Normal::new(0.0, INIT_WEIGHT_SD).expect("valid sd");
    let w = ndarray::Array2::from_shape_simple_fn((n_hidden, n_visible), || normal.sample(rng.inner_mut()));
    RbmParams::new(w, b, Array1::zeros(n_hidden))
}
