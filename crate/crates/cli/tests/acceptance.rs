//! Acceptance criteria. Prints one PASS/FAIL line per criterion (details
//! indented below it) and exits non-zero if any criterion fails. Pass
//! criterion ids such as `C3 C5` to run a subset.

use std::sync::OnceLock;
use std::time::Instant;

use rbm_cli::args::{AisArgs, BenchArgs, ConfigArgs, EvalMethod, LoadArgs};
use rbm_cli::commands::{cmd_bench, run_trial};
use rbm_cli::load_dataset;
use rbm_core::data::{bars_stripes_dataset, BarsStripesMode};
use rbm_core::gradient::{exact_model_stats, full_hessian_exact, hessian_diag_from_mean, positive_stats};
use rbm_core::model::{exact_avg_log_likelihood, exact_log_partition};
use rbm_core::training::{cd_update, sdcp_update, train, CenteredParams, EvalPoint};
use rbm_core::{
    ais_log_partition, AisConfig, Algorithm, BinaryDataset, BinaryVector, OptimizerState, ParamStats, RbmParams,
    RngStream, TrainConfig,
};

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn detail(mut self, pass: bool, line: impl Into<String>) -> Self {
        let tag = if pass { "ok  " } else { "FAIL" };
        self.details.push(format!("{tag} {}", line.into()));
        self
    }

    fn info(mut self, line: impl Into<String>) -> Self {
        self.details.push(format!("     {}", line.into()));
        self
    }
}

fn pass_fail(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn random_rows(m: usize, count: usize, rng: &mut RngStream) -> Vec<BinaryVector> {
    (0..count)
        .map(|_| BinaryVector::from_bools((0..m).map(|_| rng.bernoulli(0.5))))
        .collect()
}

/// The 50 models shared by criteria 1 and 2: m ≤ 5, n ≤ 4, parameters
/// N(0, 1), each with eight random training vectors.
fn oracle_models() -> Vec<(RbmParams, BinaryDataset)> {
    (0..50u64)
        .map(|t| {
            let mut rng = RngStream::new(1000 + t);
            let m = 1 + (rng.uniform() * 5.0) as usize;
            let n = 1 + (rng.uniform() * 4.0) as usize;
            let p = RbmParams::random_normal(m, n, 1.0, &mut rng);
            let data = BinaryDataset::from_rows(random_rows(m, 8, &mut rng)).unwrap();
            (p, data)
        })
        .collect()
}

fn shifted(p: &RbmParams, k: usize, delta: f64) -> RbmParams {
    let mut flat = p.to_flat();
    flat[k] += delta;
    RbmParams::from_flat(p.n_visible(), p.n_hidden(), &flat).unwrap()
}

fn c1_gradient() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (p, data) in oracle_models() {
        let mut pos = ParamStats::zeros_like(&p);
        for v in data.rows() {
            pos.add_assign(&positive_stats(&p, v).unwrap());
        }
        pos.scale(1.0 / data.len() as f64);
        let analytic = exact_model_stats(&p).unwrap().zip_map(&pos, |f, g| f - g).to_flat();
        let h = 1e-5;
        for (k, a) in analytic.iter().enumerate() {
            let nll = |q: RbmParams| -exact_avg_log_likelihood(&q, &data).unwrap();
            let fd = (nll(shifted(&p, k, h)) - nll(shifted(&p, k, -h))) / (2.0 * h);
            worst = worst.max((fd - a).abs() / a.abs().max(fd.abs()).max(1e-12));
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-4 && secs < 60.0;
    Outcome::new(
        pass,
        format!("max relative error {worst:.2e} (< 1e-4) over {checked} partials, {secs:.1}s (< 60s)"),
    )
}

fn c2_hessian() -> Outcome {
    let start = Instant::now();
    let (mut vs_full, mut vs_fd) = (0.0f64, 0.0f64);
    for (p, _) in oracle_models() {
        let diag = hessian_diag_from_mean(&exact_model_stats(&p).unwrap())
            .unwrap()
            .values()
            .to_flat();
        let full = full_hessian_exact(&p).unwrap();
        let f0 = exact_log_partition(&p).unwrap();
        let h = 1e-3;
        for (k, d) in diag.iter().enumerate() {
            vs_full = vs_full.max((d - full[[k, k]]).abs());
            let up = exact_log_partition(&shifted(&p, k, h)).unwrap();
            let down = exact_log_partition(&shifted(&p, k, -h)).unwrap();
            vs_fd = vs_fd.max((d - (up - 2.0 * f0 + down) / (h * h)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let (a, b) = (vs_full < 1e-12, vs_fd < 1e-4);
    Outcome::new(a && b && secs < 60.0, format!("50 models, {secs:.1}s (< 60s)"))
        .detail(
            a,
            format!("(a) vs full Hessian diagonal: max |diff| {vs_full:.2e} (< 1e-12)"),
        )
        .detail(
            b,
            format!("(b) vs finite differences of log Z: max |diff| {vs_fd:.2e} (< 1e-4)"),
        )
}

fn c3_identity() -> Outcome {
    let mut rng = RngStream::new(3000);
    let p = RbmParams::random_normal(8, 5, 0.5, &mut rng);
    let k = 4;
    let cd = TrainConfig {
        algorithm: Algorithm::Cd,
        eta: 0.1,
        k,
        ..TrainConfig::default()
    };
    let sdcp = TrainConfig {
        algorithm: Algorithm::Sdcp,
        d: 1,
        k_prime: k,
        ..cd.clone()
    };
    let mut a = OptimizerState::new(p.clone(), RngStream::new(3001));
    let mut b = OptimizerState::new(p, RngStream::new(3001));
    let mut identical = 0;
    for _ in 0..100 {
        let batch = random_rows(8, 10, &mut rng);
        cd_update(&mut a, &batch, &cd).unwrap();
        sdcp_update(&mut b, &batch, &sdcp).unwrap();
        let same = a
            .params
            .to_flat()
            .iter()
            .zip(b.params.to_flat())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        identical += usize::from(same);
    }
    Outcome::new(
        identical == 100,
        format!("{identical}/100 updates bit-identical (CD K={k} vs S-DCP d=1 K'={k})"),
    )
}

/// Per-epoch exact train ATLL traces for 10 seeds of one algorithm.
struct BarsRuns {
    algorithm: Algorithm,
    eta: f64,
    traces: Vec<Vec<f64>>,
}

const BARS_THRESHOLD: f64 = -3.0;

impl BarsRuns {
    fn finals(&self) -> Vec<f64> {
        self.traces.iter().map(|t| *t.last().unwrap()).collect()
    }

    fn mean_final(&self) -> f64 {
        let f = self.finals();
        f.iter().sum::<f64>() / f.len() as f64
    }

    fn peaks(&self) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| t.iter().copied().fold(f64::MIN, f64::max))
            .collect()
    }

    /// First epoch at or above the threshold, infinity if never.
    fn crossings(&self) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| {
                t.iter()
                    .position(|&x| x >= BARS_THRESHOLD)
                    .map_or(f64::INFINITY, |e| e as f64)
            })
            .collect()
    }

    fn tail_variance(&self) -> f64 {
        let vars: Vec<f64> = self
            .traces
            .iter()
            .map(|t| {
                let tail = &t[t.len() - 500..];
                let mean = tail.iter().sum::<f64>() / 500.0;
                tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 499.0
            })
            .collect();
        vars.iter().sum::<f64>() / vars.len() as f64
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn bars_runs() -> &'static (Vec<BarsRuns>, f64) {
    static RUNS: OnceLock<(Vec<BarsRuns>, f64)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let data = bars_stripes_dataset(3, BarsStripesMode::Weighted).unwrap();
        let runs = [Algorithm::Cd, Algorithm::Sdcp, Algorithm::Sdcpd]
            .into_iter()
            .map(|algorithm| {
                let base = TrainConfig::bars3(algorithm);
                let traces = (0..10u64)
                    .map(|seed| {
                        let cfg = TrainConfig { seed, ..base.clone() };
                        let out = train(&data, 4, &cfg, 1, |_, p| {
                            Ok(EvalPoint {
                                train_ll: exact_avg_log_likelihood(p, &data)?,
                                test_ll: None,
                            })
                        })
                        .unwrap();
                        out.trace.records.iter().map(|r| r.train_ll).collect()
                    })
                    .collect();
                BarsRuns {
                    algorithm,
                    eta: base.eta,
                    traces,
                }
            })
            .collect();
        (runs, start.elapsed().as_secs_f64())
    })
}

fn c4_bars_stripes() -> Outcome {
    let (runs, secs) = bars_runs();
    let get = |a: Algorithm| runs.iter().find(|r| r.algorithm == a).unwrap();
    let (cd, sdcp, sdcpd) = (get(Algorithm::Cd), get(Algorithm::Sdcp), get(Algorithm::Sdcpd));

    let peaks = sdcpd.peaks();
    let median_peak = median(peaks.clone());
    let best_peak = peaks.iter().copied().fold(f64::MIN, f64::max);
    let a = median_peak >= BARS_THRESHOLD;

    let (cross_d, cross_s) = (median(sdcpd.crossings()), median(sdcp.crossings()));
    let b = cross_d.is_finite() && cross_d < cross_s;

    let finals = [cd.mean_final(), sdcp.mean_final(), sdcpd.mean_final()];
    let spread = finals.iter().copied().fold(f64::MIN, f64::max) - finals.iter().copied().fold(f64::MAX, f64::min);
    let c = spread <= 0.3;
    let fast = *secs < 900.0;

    let mut out = Outcome::new(
        a && b && c && fast,
        format!("3x3 weighted, n=4, 5000 epochs, 10 seeds, {secs:.1}s (< 900s)"),
    )
    .detail(
        a,
        format!(
            "(a) S-DCP-D median best ATLL {median_peak:.4} (>= {BARS_THRESHOLD}); best over all seeds {best_peak:.4}"
        ),
    )
    .detail(
        b,
        format!(
            "(b) median first epoch >= {BARS_THRESHOLD}: S-DCP-D {cross_d}, S-DCP {cross_s} (S-DCP-D strictly smaller)"
        ),
    )
    .detail(
        c,
        format!(
            "(c) mean final ATLL CD {:.4}, S-DCP {:.4}, S-DCP-D {:.4}; spread {spread:.4} (<= 0.3)",
            finals[0], finals[1], finals[2]
        ),
    );
    for r in runs {
        out = out.info(format!(
            "{} eta={} finals {:?}",
            r.algorithm,
            r.eta,
            r.finals().iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>()
        ));
    }
    out
}

fn c5_ais() -> Outcome {
    let start = Instant::now();
    let cfg = AisConfig::default();
    let errors: Vec<f64> = (0..10u64)
        .map(|t| {
            let p = RbmParams::random_normal(9, 8, 1.0, &mut RngStream::new(5000 + t));
            let exact = exact_log_partition(&p).unwrap();
            let est = ais_log_partition(&p, &cfg, &RngStream::new(5100 + t)).unwrap();
            (est.log_z_estimate - exact).abs()
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let good = errors.iter().filter(|&&e| e < 0.1).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Outcome::new(
        good >= 9 && secs < 600.0,
        format!("{good}/10 models within 0.1 nats (need >= 9); worst {worst:.4}; {secs:.1}s (< 600s)"),
    )
}

fn c6_bench() -> Outcome {
    let args = BenchArgs {
        dataset: "bars-stripes:3".into(),
        hidden: 4,
        algorithms: vec![Algorithm::Cd, Algorithm::Sdcp, Algorithm::Sdcpd],
        trials: 10,
        config: ConfigArgs::default(),
        load: LoadArgs::default(),
        json: false,
    };
    let report = cmd_bench(&args).unwrap();
    let r1 = report.ratios["SDCP/CD"];
    let r2 = report.ratios["SDCPD/SDCP"];
    let (a, b) = ((0.9..=1.4).contains(&r1), (1.0..=1.4).contains(&r2));
    let mut out = Outcome::new(
        a && b,
        format!("{} epochs x {} trials, K = d*K' = 4", report.epochs, report.trials),
    )
    .detail(a, format!("S-DCP/CD {r1:.3} in [0.9, 1.4]"))
    .detail(b, format!("S-DCP-D/S-DCP {r2:.3} in [1.0, 1.4]"));
    for row in &report.rows {
        out = out.info(format!(
            "{} mean {:.4}s sd {:.4}s",
            row.algorithm, row.mean_seconds, row.sd_seconds
        ));
    }
    out
}

fn c7_centering() -> Outcome {
    let mut worst = 0.0f64;
    for t in 0..20u64 {
        let mut rng = RngStream::new(7000 + t);
        let p = RbmParams::random_normal(4, 3, 1.0, &mut rng);
        let data = BinaryDataset::from_rows(random_rows(4, 6, &mut rng)).unwrap();
        let mut offsets = |n: usize| ndarray::Array1::from_shape_simple_fn(n, || rng.uniform());
        let (mu, lam, mu2, lam2) = (offsets(4), offsets(3), offsets(4), offsets(3));
        let before = exact_avg_log_likelihood(&p, &data).unwrap();
        let mut centered = CenteredParams::from_standard(&p, mu, lam).unwrap();
        centered.recenter(mu2, lam2).unwrap();
        let after = exact_avg_log_likelihood(&centered.to_standard().unwrap(), &data).unwrap();
        worst = worst.max((before - after).abs());
    }
    Outcome::new(
        worst < 1e-10,
        format!("20 models, max |ATLL change| {worst:.2e} (< 1e-10)"),
    )
}

fn c8_mnist() -> Outcome {
    let start = Instant::now();
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/data/mnist-1k-images-idx3-ubyte"
    );
    let data = load_dataset(path, &LoadArgs::default()).unwrap();
    let cfg = TrainConfig {
        epochs: 60,
        ..TrainConfig::mnist(Algorithm::Sdcpd)
    };
    let ais = AisArgs::default();
    let ais = AisConfig {
        particles: ais.ais_particles,
        intermediate: ais.ais_intermediate,
    };
    let out = match run_trial(&data, None, 32, &cfg, 20, EvalMethod::Ais, &ais) {
        Ok(out) => out,
        Err(e) => return Outcome::new(false, format!("training failed: {e:#}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let lls: Vec<f64> = out.trace.records.iter().map(|r| r.train_ll).collect();
    let finite = out.params.is_finite() && lls.iter().all(|x| x.is_finite());
    let gain = lls.last().unwrap() - lls[0];
    let monotone = lls.windows(2).all(|w| w[1] >= w[0]);
    let pass = finite && gain >= 30.0 && monotone && secs < 1200.0;
    Outcome::new(
        pass,
        format!(
            "{} images, n=32, 60 epochs S-DCP-D; AIS ATLL at epochs 0/20/40/60: {}; gain {gain:.2} (>= 30), monotone {monotone}, finite {finite}, {secs:.1}s (< 1200s)",
            data.len(),
            lls.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(" / ")
        ),
    )
}

fn c9_stability() -> Outcome {
    let (runs, _) = bars_runs();
    let get = |a: Algorithm| runs.iter().find(|r| r.algorithm == a).unwrap();
    let (d, s) = (
        get(Algorithm::Sdcpd).tail_variance(),
        get(Algorithm::Sdcp).tail_variance(),
    );
    Outcome::new(
        d <= s,
        format!("mean per-run ATLL variance over the last 500 epochs: S-DCP-D {d:.3e} <= S-DCP {s:.3e}"),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("C1", "gradient oracle", c1_gradient),
        ("C2", "Hessian-diagonal oracle", c2_hessian),
        ("C3", "CD / S-DCP identity", c3_identity),
        ("C4", "Bars & Stripes learning", c4_bars_stripes),
        ("C5", "AIS accuracy", c5_ais),
        ("C6", "overhead parity", c6_bench),
        ("C7", "centering invariance", c7_centering),
        ("C8", "MNIST subset improvement", c8_mnist),
        ("C9", "stability", c9_stability),
    ];
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut ran = 0;
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.iter().any(|s| s.eq_ignore_ascii_case(id)) {
            continue;
        }
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        println!("{} {id} {name}: {}", pass_fail(outcome.pass), outcome.summary);
        for line in &outcome.details {
            println!("       {line}");
        }
        ran += 1;
        if !outcome.pass {
            failed.push(id);
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        println!("acceptance: failing criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
