use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use rbm_core::evaluation::base_log_partition;
use rbm_core::model::{exact_log_partition, read_params, write_params_rbmp};
use rbm_core::sampling::pgm::{encode_pgm_grid, GridLayout};
use rbm_core::sampling::{default_sample_steps, generate_samples};
use rbm_core::training::{train, EvalPoint, TrainOutcome};
use rbm_core::{
    ais_log_partition, estimate_atll, AisConfig, Algorithm, BinaryDataset, RbmError, RbmParams, RngStream, TrainConfig,
    TrainTrace,
};

use crate::args::{AisArgs, BenchArgs, ConfigArgs, DatasetArgs, EvalArgs, EvalMethod, GenerateArgs, TrainArgs};
use crate::dataset::{load_dataset, write_dataset};

/// Largest smaller-layer size evaluated exactly under [`EvalMethod::Auto`].
pub const AUTO_EXACT_LIMIT: usize = 20;

/// Preset (or defaults), then the config file, then individual flags.
pub fn resolve_config(args: &ConfigArgs) -> Result<TrainConfig> {
    let file_text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?),
        None => None,
    };
    let file_algorithm = match &file_text {
        Some(text) => Some(TrainConfig::default().overlay_str(text)?.algorithm),
        None => None,
    };
    let algorithm = args
        .algorithm
        .or(file_algorithm)
        .unwrap_or(TrainConfig::default().algorithm);
    let mut cfg = match &args.preset {
        Some(name) => TrainConfig::preset(name, algorithm)?,
        None => TrainConfig {
            algorithm,
            ..TrainConfig::default()
        },
    };
    if let Some(text) = &file_text {
        cfg = cfg.overlay_str(text)?;
    }
    cfg.algorithm = algorithm;
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field { cfg.$field = v; })* };
    }
    set!(eta, k, d, k_prime, epsilon, lambda_h, nu_mu, nu_lambda, epochs, seed, shuffle);
    if args.full_batch {
        cfg.batch_size = None;
    } else if let Some(n) = args.batch_size {
        cfg.batch_size = Some(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ais_config(args: &AisArgs) -> AisConfig {
    AisConfig {
        particles: args.ais_particles,
        intermediate: args.ais_intermediate,
    }
}

/// Estimated or exact log Z together with the method actually used.
#[derive(Debug, Clone, Serialize)]
pub struct LogPartition {
    pub method: &'static str,
    pub log_z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ais: Option<AisDiagnostics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AisDiagnostics {
    pub particles: usize,
    pub intermediate: usize,
    pub ess: f64,
    pub base_log_z: f64,
}

pub fn log_partition(params: &RbmParams, method: EvalMethod, ais: &AisConfig, rng: &RngStream) -> Result<LogPartition> {
    let smaller = params.n_visible().min(params.n_hidden());
    let use_exact = match method {
        EvalMethod::Exact => true,
        EvalMethod::Ais => false,
        EvalMethod::Auto => smaller <= AUTO_EXACT_LIMIT,
    };
    if use_exact {
        let log_z = exact_log_partition(params).map_err(|e| match e {
            RbmError::IntractableSize { .. } => anyhow::anyhow!("{e}; use --method ais"),
            other => other.into(),
        })?;
        return Ok(LogPartition {
            method: "exact",
            log_z,
            ais: None,
        });
    }
    let res = ais_log_partition(params, ais, rng)?;
    Ok(LogPartition {
        method: "ais",
        log_z: res.log_z_estimate,
        ais: Some(AisDiagnostics {
            particles: ais.particles,
            intermediate: ais.intermediate,
            ess: res.ess,
            base_log_z: base_log_partition(params),
        }),
    })
}

/// Per-epoch mean and maximum across trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub epoch: usize,
    pub mean_train_ll: f64,
    pub max_train_ll: f64,
    pub mean_test_ll: Option<f64>,
    pub max_test_ll: Option<f64>,
}

pub const SUMMARY_HEADER: &str = "epoch,mean_train_ll,max_train_ll,mean_test_ll,max_test_ll,trials";

fn mean_max(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean, values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

pub fn summarize(traces: &[TrainTrace]) -> Result<Vec<SummaryRow>> {
    ensure!(!traces.is_empty(), "no traces to summarize");
    let epochs: Vec<usize> = traces[0].records.iter().map(|r| r.epoch).collect();
    for t in traces {
        ensure!(
            t.records.iter().map(|r| r.epoch).eq(epochs.iter().copied()),
            "traces were evaluated at different epochs"
        );
    }
    Ok(epochs
        .iter()
        .enumerate()
        .map(|(i, &epoch)| {
            let train: Vec<f64> = traces.iter().map(|t| t.records[i].train_ll).collect();
            let test: Option<Vec<f64>> = traces.iter().map(|t| t.records[i].test_ll).collect();
            let (mean_train_ll, max_train_ll) = mean_max(&train);
            let test = test.map(|v| mean_max(&v));
            SummaryRow {
                epoch,
                mean_train_ll,
                max_train_ll,
                mean_test_ll: test.map(|t| t.0),
                max_test_ll: test.map(|t| t.1),
            }
        })
        .collect())
}

pub fn summary_csv(rows: &[SummaryRow], trials: usize) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{trials}",
            r.epoch,
            r.mean_train_ll,
            r.max_train_ll,
            opt(r.mean_test_ll),
            opt(r.max_test_ll)
        );
    }
    out
}

fn trial_seeds(args: &TrainArgs, base_seed: u64) -> Result<Vec<u64>> {
    let seeds = match (&args.seeds, args.trials) {
        (Some(seeds), Some(t)) if seeds.len() != t => {
            bail!("--seeds lists {} seeds but --trials is {t}", seeds.len())
        }
        (Some(seeds), _) => seeds.clone(),
        (None, t) => (0..t.unwrap_or(1) as u64).map(|k| base_seed.wrapping_add(k)).collect(),
    };
    ensure!(!seeds.is_empty(), "at least one trial is required");
    Ok(seeds)
}

/// Result of one `train` invocation.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub traces: Vec<TrainTrace>,
    pub summary: Vec<SummaryRow>,
    pub out_dir: PathBuf,
}

pub fn run_trial(
    data: &BinaryDataset,
    test: Option<&BinaryDataset>,
    hidden: usize,
    cfg: &TrainConfig,
    eval_every: usize,
    method: EvalMethod,
    ais: &AisConfig,
) -> Result<TrainOutcome> {
    let eval_root = RngStream::new(cfg.seed).fork(3);
    let outcome = train(data, hidden, cfg, eval_every, |epoch, params| {
        let z = log_partition(params, method, ais, &eval_root.fork(epoch as u64))
            .map_err(|e| RbmError::InvalidArgument(format!("{e:#}")))?;
        Ok(EvalPoint {
            train_ll: estimate_atll(params, data, z.log_z)?,
            test_ll: test.map(|t| estimate_atll(params, t, z.log_z)).transpose()?,
        })
    })?;
    Ok(outcome)
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainReport> {
    let base = resolve_config(&args.config)?;
    let seeds = trial_seeds(args, base.seed)?;
    ensure!(args.jobs >= 1, "--jobs must be at least 1");
    let data = load_dataset(&args.dataset, &args.load)?;
    let test = args
        .test_dataset
        .as_deref()
        .map(|s| load_dataset(s, &args.load))
        .transpose()?;
    if let Some(t) = &test {
        ensure!(
            t.dim() == data.dim(),
            "test dimension {} differs from training dimension {}",
            t.dim(),
            data.dim()
        );
    }
    std::fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let ais = ais_config(&args.ais);
    info!(
        "training {} on {} rows of dimension {}, {} hidden, {} trial(s)",
        base.algorithm,
        data.len(),
        data.dim(),
        args.hidden,
        seeds.len()
    );

    let run = |(k, seed): (usize, u64)| -> Result<TrainTrace> {
        let cfg = TrainConfig { seed, ..base.clone() };
        let outcome = run_trial(
            &data,
            test.as_ref(),
            args.hidden,
            &cfg,
            args.eval_every,
            args.eval_method,
            &ais,
        )
        .with_context(|| format!("trial {k} (seed {seed})"))?;
        write_params_rbmp(&outcome.params, args.out.join(format!("params_trial{k}.rbmp")))?;
        let path = args.out.join(format!("trace_trial{k}.csv"));
        std::fs::write(&path, outcome.trace.to_csv(!args.omit_timing))
            .with_context(|| format!("cannot write {}", path.display()))?;
        if let Some(last) = outcome.trace.final_record() {
            info!("trial {k} (seed {seed}): final train ATLL {:.4}", last.train_ll);
        }
        Ok(outcome.trace)
    };
    let indexed: Vec<(usize, u64)> = seeds.iter().copied().enumerate().collect();
    let traces: Vec<TrainTrace> = if args.jobs == 1 {
        indexed.into_iter().map(run).collect::<Result<_>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()?
            .install(|| indexed.into_par_iter().map(run).collect::<Result<_>>())?
    };

    let summary = summarize(&traces)?;
    std::fs::write(args.out.join("summary.csv"), summary_csv(&summary, traces.len()))?;
    std::fs::write(
        args.out.join("config.json"),
        serde_json::to_string_pretty(&base)? + "\n",
    )?;
    Ok(TrainReport {
        config: base,
        traces,
        summary,
        out_dir: args.out.clone(),
    })
}

/// Printed by `eval` as a single JSON line.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub atll: f64,
    pub log_z: f64,
    pub method: &'static str,
    pub n_visible: usize,
    pub n_hidden: usize,
    pub rows: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ais: Option<AisDiagnostics>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let params = read_params(&args.params).with_context(|| format!("cannot load {}", args.params.display()))?;
    let data = load_dataset(&args.dataset, &args.load)?;
    ensure!(
        data.dim() == params.n_visible(),
        "dataset dimension {} does not match the model's {} visible units",
        data.dim(),
        params.n_visible()
    );
    let z = log_partition(&params, args.method, &ais_config(&args.ais), &RngStream::new(args.seed))?;
    Ok(EvalReport {
        atll: estimate_atll(&params, &data, z.log_z)?,
        log_z: z.log_z,
        method: z.method,
        n_visible: params.n_visible(),
        n_hidden: params.n_hidden(),
        rows: data.total_weight(),
        ais: z.ais,
    })
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<PathBuf> {
    let params = read_params(&args.params).with_context(|| format!("cannot load {}", args.params.display()))?;
    let steps = args.steps.unwrap_or_else(|| default_sample_steps(params.n_visible()));
    let samples = generate_samples(&params, args.count, steps, &RngStream::new(args.seed))?;
    let layout = GridLayout::for_samples(params.n_visible(), args.count);
    let bytes = encode_pgm_grid(&samples, layout)?;
    std::fs::write(&args.out, bytes).with_context(|| format!("cannot write {}", args.out.display()))?;
    info!(
        "wrote {} samples ({} Gibbs steps) as a {}x{} grid to {}",
        args.count,
        steps,
        layout.rows,
        layout.columns,
        args.out.display()
    );
    Ok(args.out.clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub mean_seconds: f64,
    pub sd_seconds: f64,
    pub seconds: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub epochs: usize,
    pub trials: usize,
    pub rows: Vec<BenchRow>,
    /// Keys like `SDCPD/SDCP`, ratio of mean seconds.
    pub ratios: BTreeMap<String, f64>,
}

impl BenchReport {
    pub fn mean_seconds(&self, algorithm: Algorithm) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm)
            .map(|r| r.mean_seconds)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8} {:>12} {:>12}\n", "algo", "mean (s)", "sd (s)");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>12.4} {:>12.4}",
                r.algorithm.name(),
                r.mean_seconds,
                r.sd_seconds
            );
        }
        for (k, v) in &self.ratios {
            let _ = writeln!(out, "{k:<12} {v:.3}");
        }
        out
    }
}

const RATIO_PAIRS: [(Algorithm, Algorithm); 4] = [
    (Algorithm::Sdcp, Algorithm::Cd),
    (Algorithm::Sdcpd, Algorithm::Sdcp),
    (Algorithm::Sdcp, Algorithm::Cg),
    (Algorithm::Sdcpd, Algorithm::Cd),
];

/// Trials are interleaved across algorithms so that slow drift in machine
/// load affects every algorithm alike. Each timing covers training only.
pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport> {
    ensure!(args.trials >= 1, "--trials must be at least 1");
    ensure!(!args.algorithms.is_empty(), "no algorithms selected");
    let data = load_dataset(&args.dataset, &args.load)?;
    let mut config_args = args.config.clone();
    if config_args.preset.is_none() && args.dataset.starts_with("bars-stripes:3") {
        config_args.preset = Some("bars3".into());
    }
    let configs: Vec<TrainConfig> = args
        .algorithms
        .iter()
        .map(|&a| {
            resolve_config(&ConfigArgs {
                algorithm: Some(a),
                ..config_args.clone()
            })
        })
        .collect::<Result<_>>()?;
    let epochs = configs[0].epochs;
    let no_eval = |_: usize, _: &RbmParams| {
        Ok(EvalPoint {
            train_ll: 0.0,
            test_ll: None,
        })
    };
    let time = |cfg: &TrainConfig| -> Result<f64> {
        let out = train(&data, args.hidden, cfg, cfg.epochs.max(1), no_eval)?;
        Ok(out.trace.final_record().map_or(0.0, |r| r.wall_seconds))
    };
    // Warm-up so the first timed run does not pay for page faults.
    time(&TrainConfig {
        epochs: epochs.min(5),
        ..configs[0].clone()
    })?;

    let mut seconds = vec![Vec::with_capacity(args.trials); configs.len()];
    for trial in 0..args.trials {
        for (cfg, secs) in configs.iter().zip(seconds.iter_mut()) {
            let cfg = TrainConfig {
                seed: cfg.seed.wrapping_add(trial as u64),
                ..cfg.clone()
            };
            secs.push(time(&cfg)?);
        }
    }
    let rows: Vec<BenchRow> = args
        .algorithms
        .iter()
        .zip(seconds)
        .map(|(&algorithm, seconds)| {
            let n = seconds.len() as f64;
            let mean = seconds.iter().sum::<f64>() / n;
            let var = if seconds.len() > 1 {
                seconds.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            BenchRow {
                algorithm,
                mean_seconds: mean,
                sd_seconds: var.sqrt(),
                seconds,
            }
        })
        .collect();
    let mut report = BenchReport {
        epochs,
        trials: args.trials,
        rows,
        ratios: BTreeMap::new(),
    };
    for (num, den) in RATIO_PAIRS {
        if let (Some(a), Some(b)) = (report.mean_seconds(num), report.mean_seconds(den)) {
            if b > 0.0 {
                report.ratios.insert(format!("{num}/{den}"), a / b);
            }
        }
    }
    Ok(report)
}

pub fn cmd_dataset(args: &DatasetArgs) -> Result<BinaryDataset> {
    let data = load_dataset(&args.source, &args.load)?;
    write_dataset(&data, &args.out)?;
    info!(
        "wrote {} rows of dimension {} to {}",
        data.total_weight(),
        data.dim(),
        args.out.display()
    );
    Ok(data)
}

/// Reads every `trace_trial*.csv` in `dir`, ordered by trial index.
pub fn read_traces(dir: &Path) -> Result<Vec<TrainTrace>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(k) = name.strip_prefix("trace_trial").and_then(|r| r.strip_suffix(".csv")) {
            if let Ok(k) = k.parse::<usize>() {
                found.push((k, path));
            }
        }
    }
    found.sort();
    found
        .into_iter()
        .map(|(_, p)| Ok(TrainTrace::from_csv(&std::fs::read_to_string(&p)?)?))
        .collect()
}
