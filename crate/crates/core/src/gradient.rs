//! Sufficient statistics for the likelihood gradient and the diagonal of the
//! log-partition Hessian.
//!
//! All statistics are positive quantities: `positive_stats(v)` is `∇_θ g(θ,v)`
//! and the model expectation of the same statistics is `∇_θ f(θ)`. Because
//! every sufficient statistic is binary, the diagonal of `∇²f` equals the
//! Bernoulli variance `p(1 − p)` of its mean `p`.

use ndarray::{Array1, Array2, Zip};

use crate::error::{check_len, RbmError, Result};
use crate::model::{
    enumerate_side, hidden_input, BinaryVector, EnumerationSide, ParamStats, RbmParams, DEFAULT_ENUMERATION_CAP,
};
use crate::numeric::{logistic, LogSumExp};

/// Largest `m + n` accepted by [`full_hessian_exact`].
pub const FULL_HESSIAN_CAP: usize = 12;

/// Tolerance on mean statistics leaving `[0, 1]` through rounding.
const MEAN_TOLERANCE: f64 = 1e-12;

/// Factored per-sample statistics: `dw = hidden ⊗ visible`, `db = visible`,
/// `dc = hidden`, where `hidden` holds the conditional means `p(h_i = 1 | v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub visible: Array1<f64>,
    pub hidden: Array1<f64>,
}

impl SampleStats {
    pub(crate) fn compute(params: &RbmParams, v: &BinaryVector) -> Self {
        Self {
            visible: v.to_f64(),
            hidden: hidden_input(params, v).mapv_into(logistic),
        }
    }

    pub fn to_param_stats(&self) -> ParamStats {
        let dw = Array2::from_shape_fn((self.hidden.len(), self.visible.len()), |(i, j)| {
            self.hidden[i] * self.visible[j]
        });
        ParamStats {
            dw,
            db: self.visible.clone(),
            dc: self.hidden.clone(),
        }
    }
}

impl ParamStats {
    /// `self += a − b`, with each difference formed per entry before adding.
    pub fn add_difference(&mut self, a: &SampleStats, b: &SampleStats) {
        for (i, mut row) in self.dw.rows_mut().into_iter().enumerate() {
            let (ah, bh) = (a.hidden[i], b.hidden[i]);
            Zip::from(&mut row)
                .and(&a.visible)
                .and(&b.visible)
                .for_each(|d, &av, &bv| *d += ah * av - bh * bv);
        }
        Zip::from(&mut self.db)
            .and(&a.visible)
            .and(&b.visible)
            .for_each(|d, &x, &y| *d += x - y);
        Zip::from(&mut self.dc)
            .and(&a.hidden)
            .and(&b.hidden)
            .for_each(|d, &x, &y| *d += x - y);
    }

    /// `self += a`.
    pub fn add_sample(&mut self, a: &SampleStats) {
        for (i, mut row) in self.dw.rows_mut().into_iter().enumerate() {
            row.scaled_add(a.hidden[i], &a.visible);
        }
        self.db += &a.visible;
        self.dc += &a.hidden;
    }
}

/// Data-side statistics `∇_θ g(θ, v)`: `dw_ij = p(h_i|v)·v_j`, `db = v`,
/// `dc = p(h|v)`.
pub fn positive_stats(params: &RbmParams, v: &BinaryVector) -> Result<ParamStats> {
    params.check_visible(v)?;
    Ok(SampleStats::compute(params, v).to_param_stats())
}

/// Single-sample estimate of `∇_θ f(θ)` from a chain state `ṽ`; the same
/// formula as [`positive_stats`].
pub fn negative_stats(params: &RbmParams, v_tilde: &BinaryVector) -> Result<ParamStats> {
    positive_stats(params, v_tilde)
}

/// Diagonal Hessian estimate, one non-negative entry per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianDiag(ParamStats);

impl HessianDiag {
    /// Wraps explicit values; every entry must be finite and non-negative.
    pub fn new(values: ParamStats) -> Result<Self> {
        if let Some(x) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(RbmError::Contract(format!(
                "Hessian diagonal entry {x} is negative or non-finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self(ParamStats::zeros(n_visible, n_hidden))
    }

    pub fn values(&self) -> &ParamStats {
        &self.0
    }

    pub fn into_inner(self) -> ParamStats {
        self.0
    }
}

/// `p ⊙ (1 − p)` applied to mean sufficient statistics.
pub fn hessian_diag_from_mean(mean_stats: &ParamStats) -> Result<HessianDiag> {
    if let Some(p) = mean_stats
        .iter()
        .find(|p| !(**p >= -MEAN_TOLERANCE && **p <= 1.0 + MEAN_TOLERANCE))
    {
        return Err(RbmError::Contract(format!("mean statistic {p} outside [0, 1]")));
    }
    Ok(HessianDiag(mean_stats.map(|p| {
        let p = p.clamp(0.0, 1.0);
        p * (1.0 - p)
    })))
}

/// `λ·prev + (1 − λ)·fresh`, elementwise.
pub fn ema_update(prev: &HessianDiag, fresh: &HessianDiag, lambda_h: f64) -> Result<HessianDiag> {
    if !(0.0..=1.0).contains(&lambda_h) {
        return Err(RbmError::invalid(format!("lambda_H = {lambda_h} outside [0, 1]")));
    }
    if !prev.0.same_shape(&fresh.0) {
        return Err(RbmError::Shape {
            what: "Hessian diagonal length",
            expected: prev.0.len(),
            actual: fresh.0.len(),
        });
    }
    Ok(HessianDiag(
        prev.0.zip_map(&fresh.0, |p, f| lambda_h * p + (1.0 - lambda_h) * f),
    ))
}

/// Exact model means `E[h_i v_j]`, `E[v_j]`, `E[h_i]` under `p(v, h; θ)`,
/// i.e. the exact `∇_θ f`. Enumerates the smaller layer.
pub fn exact_model_stats(params: &RbmParams) -> Result<ParamStats> {
    let side = if params.n_hidden() < params.n_visible() {
        EnumerationSide::Hidden
    } else {
        EnumerationSide::Visible
    };
    let units = params.n_visible().min(params.n_hidden());
    if units > DEFAULT_ENUMERATION_CAP {
        return Err(RbmError::IntractableSize {
            units,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut lse = LogSumExp::default();
    enumerate_side(params, side, |_, lw, _| lse.push(lw));
    let log_z = lse.value();

    let (m, n) = (params.n_visible(), params.n_hidden());
    let mut stats = ParamStats::zeros(m, n);
    enumerate_side(params, side, |state, lw, input| {
        let p = (lw - log_z).exp();
        let own = Array1::from_shape_fn(units, |r| ((state >> r) & 1) as f64);
        let other = input.mapv(logistic);
        let (visible, hidden) = match side {
            EnumerationSide::Hidden => (other, own),
            _ => (own, other),
        };
        for i in 0..n {
            let ph = p * hidden[i];
            stats.dw.row_mut(i).scaled_add(ph, &visible);
        }
        stats.db.scaled_add(p, &visible);
        stats.dc.scaled_add(p, &hidden);
    });
    Ok(stats)
}

/// Full Hessian of `f(θ) = log Z_θ` as the covariance of the sufficient
/// statistics under `p(v, h; θ)`, in the canonical parameter order (`w`
/// row-major, `b`, `c`).
///
/// Test oracle only: enumerates all `2^{m+n}` joint states.
pub fn full_hessian_exact(params: &RbmParams) -> Result<Array2<f64>> {
    let (m, n) = (params.n_visible(), params.n_hidden());
    if m + n > FULL_HESSIAN_CAP {
        return Err(RbmError::IntractableSize {
            units: m + n,
            cap: FULL_HESSIAN_CAP,
        });
    }
    let dim = params.len();
    let states = 1usize << (m + n);
    let mut features = Vec::with_capacity(states);
    let mut log_weights = Vec::with_capacity(states);
    let mut lse = LogSumExp::default();
    for s in 0..states as u64 {
        let v = BinaryVector::from_index(s & ((1 << m) - 1), m);
        let h = BinaryVector::from_index(s >> m, n);
        let lw = -crate::model::energy(params, &v, &h)?;
        lse.push(lw);
        log_weights.push(lw);
        let mut phi = Vec::with_capacity(dim);
        for i in 0..n {
            for j in 0..m {
                phi.push(f64::from(h.get(i) * v.get(j)));
            }
        }
        phi.extend(v.bits().iter().map(|&x| f64::from(x)));
        phi.extend(h.bits().iter().map(|&x| f64::from(x)));
        features.push(phi);
    }
    let log_z = lse.value();
    let mut mean = vec![0.0; dim];
    let mut second = Array2::<f64>::zeros((dim, dim));
    for (phi, lw) in features.iter().zip(&log_weights) {
        let p = (lw - log_z).exp();
        for a in 0..dim {
            if phi[a] == 0.0 {
                continue;
            }
            mean[a] += p * phi[a];
            for b in 0..dim {
                second[[a, b]] += p * phi[a] * phi[b];
            }
        }
    }
    for a in 0..dim {
        for b in 0..dim {
            second[[a, b]] -= mean[a] * mean[b];
        }
    }
    Ok(second)
}

/// Mean of per-sample statistics; the result lies in `[0, 1]` entrywise.
pub fn mean_stats(params: &RbmParams, samples: &[BinaryVector]) -> Result<ParamStats> {
    if samples.is_empty() {
        return Err(RbmError::EmptyDataset);
    }
    let mut acc = ParamStats::zeros_like(params);
    for v in samples {
        check_len("visible vector", params.n_visible(), v.len())?;
        acc.add_sample(&SampleStats::compute(params, v));
    }
    acc.scale(1.0 / samples.len() as f64);
    Ok(acc)
}
