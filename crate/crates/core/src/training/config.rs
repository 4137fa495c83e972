use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RbmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Contrastive divergence with `k` Gibbs steps from the data.
    #[serde(rename = "CD")]
    Cd,
    /// Persistent contrastive divergence.
    #[serde(rename = "PCD")]
    Pcd,
    /// Centered gradient with data-driven sliding offsets.
    #[serde(rename = "CG")]
    Cg,
    /// Stochastic difference-of-convex programming.
    #[serde(rename = "SDCP")]
    Sdcp,
    /// S-DCP with inverse diagonal-Hessian step scaling.
    #[serde(rename = "SDCPD")]
    Sdcpd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Cd,
        Algorithm::Pcd,
        Algorithm::Cg,
        Algorithm::Sdcp,
        Algorithm::Sdcpd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Cd => "CD",
            Algorithm::Pcd => "PCD",
            Algorithm::Cg => "CG",
            Algorithm::Sdcp => "SDCP",
            Algorithm::Sdcpd => "SDCPD",
        }
    }

    /// Gibbs transitions per training sample in one minibatch update.
    pub fn transitions_per_sample(self, cfg: &TrainConfig) -> usize {
        match self {
            Algorithm::Cd | Algorithm::Pcd | Algorithm::Cg => cfg.k,
            Algorithm::Sdcp | Algorithm::Sdcpd => cfg.d * cfg.k_prime,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = RbmError;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| RbmError::invalid(format!("unknown algorithm {s:?}")))
    }
}

/// Algorithm choice and every training hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    /// Learning rate η.
    pub eta: f64,
    /// Gibbs steps for CD, PCD and CG.
    pub k: usize,
    /// Inner iterations of S-DCP / S-DCP-D.
    pub d: usize,
    /// Gibbs steps per inner iteration.
    pub k_prime: usize,
    /// Added to the Hessian diagonal before inversion.
    pub epsilon: f64,
    /// Memory of the Hessian-diagonal exponential average.
    pub lambda_h: f64,
    /// Sliding-average rate of the visible offset (CG).
    pub nu_mu: f64,
    /// Sliding-average rate of the hidden offset (CG).
    pub nu_lambda: f64,
    /// `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Sdcpd,
            eta: 0.01,
            k: 24,
            d: 6,
            k_prime: 4,
            epsilon: 0.01,
            lambda_h: 0.9,
            nu_mu: 0.01,
            nu_lambda: 0.01,
            batch_size: Some(200),
            epochs: 200,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    /// Bars & Stripes: K = 4 (d = 2, K′ = 2), full batch, 5000 epochs.
    /// Learning rates and `lambda_h = 0.5` were tuned on 3×3 Bars & Stripes
    /// with 4 hidden units.
    pub fn bars3(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            eta: bars3_learning_rate(algorithm),
            k: 4,
            d: 2,
            k_prime: 2,
            lambda_h: 0.5,
            batch_size: None,
            epochs: 5000,
            ..Self::default()
        }
    }

    /// Large datasets: K = 24 (d = 6, K′ = 4), minibatches of 200, 200 epochs.
    /// Learning rates are untuned starting points.
    pub fn mnist(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            eta: match algorithm {
                Algorithm::Sdcpd => 0.01,
                _ => 0.05,
            },
            ..Self::default()
        }
    }

    pub fn preset(name: &str, algorithm: Algorithm) -> Result<Self> {
        match name {
            "bars3" => Ok(Self::bars3(algorithm)),
            "mnist" => Ok(Self::mnist(algorithm)),
            _ => Err(RbmError::invalid(format!(
                "unknown preset {name:?} (expected bars3 or mnist)"
            ))),
        }
    }

    /// Parses a TOML or JSON document with the field names of this struct.
    pub fn from_config_str(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            toml::from_str(text).map_err(|e| RbmError::format(e.to_string()))
        }
    }

    /// Applies the fields present in a TOML or JSON document on top of
    /// `self`; absent fields keep their current values.
    pub fn overlay_str(&self, text: &str) -> Result<Self> {
        let patch: serde_json::Value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text).map_err(|e| RbmError::format(e.to_string()))?
        };
        let serde_json::Value::Object(patch) = patch else {
            return Err(RbmError::format("config must be a table of fields"));
        };
        let mut base = serde_json::to_value(self)?;
        let fields = base.as_object_mut().expect("struct serializes to an object");
        fields.extend(patch);
        Ok(serde_json::from_value(base)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(RbmError::invalid(msg.to_string()));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail("eta must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail("epsilon must be positive");
        }
        if !(0.0..=1.0).contains(&self.lambda_h) {
            return fail("lambda_h must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.nu_mu) || !(0.0..=1.0).contains(&self.nu_lambda) {
            return fail("nu_mu and nu_lambda must lie in [0, 1]");
        }
        if self.batch_size == Some(0) {
            return fail("batch_size must be at least 1");
        }
        match self.algorithm {
            Algorithm::Sdcp | Algorithm::Sdcpd if self.d == 0 || self.k_prime == 0 => {
                fail("d and k_prime must be at least 1")
            }
            Algorithm::Cd | Algorithm::Pcd | Algorithm::Cg if self.k == 0 => fail("k must be at least 1"),
            _ => Ok(()),
        }
    }
}

/// Per-algorithm learning rates selected by grid search on 3×3 Bars &
/// Stripes (4 hidden units, full batch).
pub fn bars3_learning_rate(algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::Cd | Algorithm::Pcd => 0.3,
        Algorithm::Cg => 0.2,
        Algorithm::Sdcp => 0.12,
        Algorithm::Sdcpd => 0.04,
    }
}
