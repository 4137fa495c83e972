//! Trainers and the epoch loop.

mod centering;
mod config;
mod state;
mod updates;

pub use centering::CenteredParams;
pub use config::{bars3_learning_rate, Algorithm, TrainConfig};
pub use state::{init_params, init_params_with, OptimizerState, DEFAULT_P_MIN, INIT_WEIGHT_SD};
pub use updates::{apply_update, cd_update, cg_update, pcd_update, sdcp_update, sdcpd_update};

use std::fmt::Write as _;
use std::time::Instant;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::data::{minibatches, BinaryDataset};
use crate::error::{RbmError, Result};
use crate::model::RbmParams;
use crate::sampling::RngStream;

/// Likelihood metrics at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub train_ll: f64,
    pub test_ll: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub train_ll: f64,
    pub test_ll: Option<f64>,
    /// Cumulative training time, excluding evaluation.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub const CSV_HEADER: &'static str = "epoch,train_ll,test_ll,wall_seconds,algorithm,seed";

    /// One line per record; an absent test metric is an empty field. When
    /// `with_timing` is false the time column is written as 0 so that the
    /// file is reproducible byte for byte.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let test = r.test_ll.map(|t| t.to_string()).unwrap_or_default();
            let secs = if with_timing { r.wall_seconds } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epoch, r.train_ll, test, secs, self.algorithm, self.seed
            );
        }
        out
    }

    /// Parses the format written by [`TrainTrace::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(Self::CSV_HEADER) {
            return Err(RbmError::format("missing trace CSV header"));
        }
        let mut records = Vec::new();
        let mut meta = None;
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(RbmError::format(format!("bad trace line {line:?}")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| RbmError::format(format!("bad number {s:?}")))
            };
            records.push(TraceRecord {
                epoch: f[0].parse().map_err(|_| RbmError::format("bad epoch"))?,
                train_ll: num(f[1])?,
                test_ll: if f[2].is_empty() { None } else { Some(num(f[2])?) },
                wall_seconds: num(f[3])?,
            });
            meta = Some((
                f[4].parse::<Algorithm>()?,
                f[5].parse::<u64>().map_err(|_| RbmError::format("bad seed"))?,
            ));
        }
        let (algorithm, seed) = meta.ok_or_else(|| RbmError::format("trace has no records"))?;
        Ok(Self {
            algorithm,
            seed,
            records,
        })
    }

    pub fn final_record(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// The same trace with timing zeroed, for equality checks.
    pub fn without_timing(&self) -> Self {
        let mut t = self.clone();
        t.records.iter_mut().for_each(|r| r.wall_seconds = 0.0);
        t
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: RbmParams,
    pub trace: TrainTrace,
}

/// Trains an RBM with `n_hidden` hidden units for `cfg.epochs` epochs.
///
/// Every row of `data` (expanded by multiplicity) is visited once per epoch,
/// reshuffled each epoch when `cfg.shuffle` is set. `eval_hook` runs before
/// the first epoch, after every `eval_every`-th epoch and after the last.
/// There is no stopping criterion.
///
/// Random streams derive from `cfg.seed`: `fork(0)` initializes the
/// weights, `fork(1)` drives the updates, `fork(2)` shuffles.
pub fn train<F>(
    data: &BinaryDataset,
    n_hidden: usize,
    cfg: &TrainConfig,
    eval_every: usize,
    mut eval_hook: F,
) -> Result<TrainOutcome>
where
    F: FnMut(usize, &RbmParams) -> Result<EvalPoint>,
{
    cfg.validate()?;
    if eval_every == 0 {
        return Err(RbmError::invalid("eval_every must be at least 1"));
    }
    let rows = data.expanded();
    if rows.is_empty() {
        return Err(RbmError::EmptyDataset);
    }
    let root = RngStream::new(cfg.seed);
    let params = init_params(data, data.dim(), n_hidden, &mut root.fork(0))?;
    let mu = Array1::from(data.column_means()?);
    let lam = Array1::from_elem(n_hidden, 0.5);
    let mut state = OptimizerState::new(params, root.fork(1)).with_offsets(mu, lam)?;
    let mut shuffle_rng = root.fork(2);
    let batch_size = cfg.batch_size.unwrap_or(rows.len()).min(rows.len());

    let mut trace = TrainTrace {
        algorithm: cfg.algorithm,
        seed: cfg.seed,
        records: Vec::new(),
    };
    let mut record = |epoch: usize, params: &RbmParams, secs: f64, trace: &mut TrainTrace| -> Result<()> {
        let point = eval_hook(epoch, params)?;
        trace.records.push(TraceRecord {
            epoch,
            train_ll: point.train_ll,
            test_ll: point.test_ll,
            wall_seconds: secs,
        });
        Ok(())
    };
    record(0, &state.params, 0.0, &mut trace)?;

    let mut elapsed = 0.0;
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        for batch in minibatches(&rows, batch_size, cfg.shuffle, &mut shuffle_rng)? {
            apply_update(&mut state, &batch, cfg)?;
        }
        elapsed += start.elapsed().as_secs_f64();
        if !state.params.is_finite() {
            return Err(RbmError::NonFinite(format!(
                "{} parameters diverged in epoch {epoch}",
                cfg.algorithm
            )));
        }
        if epoch % eval_every == 0 || epoch == cfg.epochs {
            record(epoch, &state.params, elapsed, &mut trace)?;
        }
    }
    Ok(TrainOutcome {
        params: state.params,
        trace,
    })
}
