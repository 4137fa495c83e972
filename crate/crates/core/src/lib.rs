//! Training and evaluation of binary-binary restricted Boltzmann machines.
//!
//! The crate provides the classic contrastive-divergence family of trainers
//! (CD, PCD, centered gradient) together with stochastic difference-of-convex
//! programming (S-DCP) and its diagonally scaled variant (S-DCP-D), which
//! rescales every inner gradient step by the inverse of an exponentially
//! averaged estimate of the diagonal of the log-partition Hessian.
//!
//! Likelihoods are evaluated exactly by enumeration for small models and by
//! annealed importance sampling otherwise.
//!
//! Conventions used throughout:
//! * the weight matrix is stored hidden × visible (`n × m`);
//! * sufficient statistics are positive quantities, so likelihood ascent
//!   is `θ + η (positive − negative)`.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod gradient;
pub mod model;
pub mod numeric;
pub mod sampling;
pub mod training;

pub use data::BinaryDataset;
pub use error::{RbmError, Result};
pub use evaluation::{ais_log_partition, estimate_atll, AisConfig, AisResult};
pub use gradient::{HessianDiag, SampleStats};
pub use model::{BinaryVector, ParamStats, RbmParams};
pub use sampling::{ChainState, RngStream};
pub use training::{Algorithm, OptimizerState, TrainConfig, TrainTrace};
