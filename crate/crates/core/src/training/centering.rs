use ndarray::Array1;

use crate::error::{check_len, Result};
use crate::model::RbmParams;

/// RBM in centered form, with energy
/// `−(v−μ)ᵀ wᵀ (h−λ) − (v−μ)ᵀ b̃ − (h−λ)ᵀ c̃`.
///
/// It describes the same distribution as the standard parameters with
/// `b = b̃ − wᵀλ` and `c = c̃ − wμ` (up to a constant absorbed by `Z`).
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredParams {
    pub w: ndarray::Array2<f64>,
    pub b: Array1<f64>,
    pub c: Array1<f64>,
    pub mu: Array1<f64>,
    pub lam: Array1<f64>,
}

impl CenteredParams {
    pub fn from_standard(params: &RbmParams, mu: Array1<f64>, lam: Array1<f64>) -> Result<Self> {
        check_len("visible offsets", params.n_visible(), mu.len())?;
        check_len("hidden offsets", params.n_hidden(), lam.len())?;
        Ok(Self {
            b: &params.b + &params.w.t().dot(&lam),
            c: &params.c + &params.w.dot(&mu),
            w: params.w.clone(),
            mu,
            lam,
        })
    }

    pub fn to_standard(&self) -> Result<RbmParams> {
        RbmParams::new(
            self.w.clone(),
            &self.b - &self.w.t().dot(&self.lam),
            &self.c - &self.w.dot(&self.mu),
        )
    }

    /// Moves the offsets to `(mu, lam)` and shifts the centered biases so
    /// that the represented distribution is unchanged:
    /// `b̃ ← b̃ + wᵀ(λ′ − λ)`, `c̃ ← c̃ + w(μ′ − μ)`.
    pub fn recenter(&mut self, mu: Array1<f64>, lam: Array1<f64>) -> Result<()> {
        check_len("visible offsets", self.mu.len(), mu.len())?;
        check_len("hidden offsets", self.lam.len(), lam.len())?;
        self.b = &self.b + &self.w.t().dot(&(&lam - &self.lam));
        self.c = &self.c + &self.w.dot(&(&mu - &self.mu));
        self.mu = mu;
        self.lam = lam;
        Ok(())
    }
}
