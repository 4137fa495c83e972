//! One minibatch update per trainer.
//!
//! Sample `i` of a batch always draws from `fork(i)` of the update's random
//! stream, so CD(K) and S-DCP with `d = 1, K′ = K` consume identical
//! randomness and, with the sign conventions below, produce bit-identical
//! parameters.

use ndarray::{Array1, Zip};

use super::config::TrainConfig;
use super::state::OptimizerState;
use crate::error::{check_len, RbmError, Result};
use crate::gradient::{ema_update, hessian_diag_from_mean, SampleStats};
use crate::model::{BinaryVector, ParamStats, RbmParams};
use crate::sampling::{run_chain_in_place, ChainState, RngStream};

fn check_batch(params: &RbmParams, batch: &[BinaryVector], eta: f64) -> Result<()> {
    if batch.is_empty() {
        return Err(RbmError::invalid("minibatch is empty"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(RbmError::invalid(format!(
            "learning rate {eta} must be finite and >= 0"
        )));
    }
    batch
        .iter()
        .try_for_each(|v| check_len("visible vector", params.n_visible(), v.len()))
}

fn chain_streams(rng: &RngStream, count: usize) -> Vec<RngStream> {
    (0..count as u64).map(|i| rng.fork(i)).collect()
}

/// CD(K): chains start at the data; `θ ← θ + η Σ(pos − neg) / N_B`.
pub fn cd_update(state: &mut OptimizerState, batch: &[BinaryVector], cfg: &TrainConfig) -> Result<()> {
    check_batch(&state.params, batch, cfg.eta)?;
    let rng = state.next_update_rng();
    let params = &state.params;
    let mut delta = ParamStats::zeros_like(params);
    for (i, v) in batch.iter().enumerate() {
        let mut chain_rng = rng.fork(i as u64);
        let pos = SampleStats::compute(params, v);
        let mut chain = v.clone();
        run_chain_in_place(params, &mut chain, cfg.k, &mut chain_rng);
        let neg = SampleStats::compute(params, &chain);
        delta.add_difference(&pos, &neg);
    }
    state.params.add_scaled(&delta, cfg.eta / batch.len() as f64);
    Ok(())
}

/// PCD(K): like CD, but chain `i` resumes from the persistent state left by
/// the previous update. The chain pool is created from the first batch.
pub fn pcd_update(state: &mut OptimizerState, batch: &[BinaryVector], cfg: &TrainConfig) -> Result<()> {
    check_batch(&state.params, batch, cfg.eta)?;
    let chains = state
        .persistent_chains
        .get_or_insert_with(|| ChainState::new(batch.to_vec()));
    if batch.len() > chains.len() {
        return Err(RbmError::Shape {
            what: "persistent chain count",
            expected: batch.len(),
            actual: chains.len(),
        });
    }
    let rng = state.next_update_rng();
    let chains = state.persistent_chains.as_mut().expect("initialized above");
    let params = &state.params;
    let mut delta = ParamStats::zeros_like(params);
    for (i, v) in batch.iter().enumerate() {
        let mut chain_rng = rng.fork(i as u64);
        let pos = SampleStats::compute(params, v);
        let chain = &mut chains.visible[i];
        run_chain_in_place(params, chain, cfg.k, &mut chain_rng);
        let neg = SampleStats::compute(params, chain);
        delta.add_difference(&pos, &neg);
    }
    state.params.add_scaled(&delta, cfg.eta / batch.len() as f64);
    Ok(())
}

/// Centered gradient (offsets from data, sliding averages, reparameterize
/// before the gradient). Parameters are kept in standard form, where moving
/// the offsets is the identity; the gradient is taken on the centered
/// parameters and mapped back:
///
/// ```text
/// ∇w = ⟨(v−μ)(ĥ−λ)ᵀ⟩_data − ⟨(ṽ−μ)(h̃−λ)ᵀ⟩_model
/// Δb = ⟨v⟩ − ⟨ṽ⟩ − ∇wᵀλ
/// Δc = ⟨ĥ⟩ − ⟨h̃⟩ − ∇w μ
/// ```
pub fn cg_update(state: &mut OptimizerState, batch: &[BinaryVector], cfg: &TrainConfig) -> Result<()> {
    check_batch(&state.params, batch, cfg.eta)?;
    let rng = state.next_update_rng();
    let params = &state.params;
    let nb = batch.len() as f64;

    let mut data_stats = Vec::with_capacity(batch.len());
    let mut model_stats = Vec::with_capacity(batch.len());
    for (i, v) in batch.iter().enumerate() {
        let mut chain_rng = rng.fork(i as u64);
        data_stats.push(SampleStats::compute(params, v));
        let mut chain = v.clone();
        run_chain_in_place(params, &mut chain, cfg.k, &mut chain_rng);
        model_stats.push(SampleStats::compute(params, &chain));
    }

    let mean_of = |pick: fn(&SampleStats) -> &Array1<f64>, len: usize| {
        let mut acc = Array1::<f64>::zeros(len);
        data_stats.iter().for_each(|s| acc += pick(s));
        acc / nb
    };
    let batch_visible_mean = mean_of(|s| &s.visible, params.n_visible());
    let batch_hidden_mean = mean_of(|s| &s.hidden, params.n_hidden());
    Zip::from(&mut state.mu)
        .and(&batch_visible_mean)
        .for_each(|mu, &x| *mu = (1.0 - cfg.nu_mu) * *mu + cfg.nu_mu * x);
    Zip::from(&mut state.lam)
        .and(&batch_hidden_mean)
        .for_each(|lam, &x| *lam = (1.0 - cfg.nu_lambda) * *lam + cfg.nu_lambda * x);

    let center = |s: &SampleStats| SampleStats {
        visible: &s.visible - &state.mu,
        hidden: &s.hidden - &state.lam,
    };
    let mut delta = ParamStats::zeros_like(params);
    for (d, m) in data_stats.iter().zip(&model_stats) {
        let (dc, mc) = (center(d), center(m));
        for (i, mut row) in delta.dw.rows_mut().into_iter().enumerate() {
            let (a, b) = (dc.hidden[i], mc.hidden[i]);
            Zip::from(&mut row)
                .and(&dc.visible)
                .and(&mc.visible)
                .for_each(|x, &av, &bv| *x += a * av - b * bv);
        }
        Zip::from(&mut delta.db)
            .and(&d.visible)
            .and(&m.visible)
            .for_each(|x, &a, &b| *x += a - b);
        Zip::from(&mut delta.dc)
            .and(&d.hidden)
            .and(&m.hidden)
            .for_each(|x, &a, &b| *x += a - b);
    }
    delta.db -= &delta.dw.t().dot(&state.lam);
    delta.dc -= &delta.dw.dot(&state.mu);
    state.params.add_scaled(&delta, cfg.eta / nb);
    Ok(())
}

/// How S-DCP scales the inner gradient step.
pub(super) enum InnerStep<'a> {
    Plain,
    Diagonal {
        epsilon: f64,
        lambda_h: f64,
        state: &'a mut Option<crate::gradient::HessianDiag>,
    },
}

/// Runs the inner loop and returns the final chain states.
pub(super) fn dcp_update(
    params: &mut RbmParams,
    rng: RngStream,
    batch: &[BinaryVector],
    cfg: &TrainConfig,
    mut step: InnerStep<'_>,
) -> Result<Vec<BinaryVector>> {
    let nb = batch.len() as f64;
    let outer: Vec<SampleStats> = batch.iter().map(|v| SampleStats::compute(params, v)).collect();
    let mut chains: Vec<BinaryVector> = batch.to_vec();
    let mut streams = chain_streams(&rng, batch.len());
    let mut theta = params.clone();
    let mut delta = ParamStats::zeros_like(&theta);
    let mut model_sum = match step {
        InnerStep::Diagonal { .. } => Some(ParamStats::zeros_like(&theta)),
        InnerStep::Plain => None,
    };
    for _ in 0..cfg.d {
        delta.fill(0.0);
        if let Some(sum) = model_sum.as_mut() {
            sum.fill(0.0);
        }
        for ((chain, chain_rng), pos) in chains.iter_mut().zip(streams.iter_mut()).zip(&outer) {
            run_chain_in_place(&theta, chain, cfg.k_prime, chain_rng);
            let neg = SampleStats::compute(&theta, chain);
            delta.add_difference(&neg, pos);
            if let Some(sum) = model_sum.as_mut() {
                sum.add_sample(&neg);
            }
        }
        match &mut step {
            InnerStep::Plain => theta.add_scaled(&delta, -cfg.eta / nb),
            InnerStep::Diagonal {
                epsilon,
                lambda_h,
                state,
            } => {
                let mean = model_sum.as_mut().expect("allocated for the diagonal step");
                mean.scale(1.0 / nb);
                let fresh = hessian_diag_from_mean(mean)?;
                let averaged = match state.take() {
                    Some(prev) => ema_update(&prev, &fresh, *lambda_h)?,
                    None => fresh,
                };
                let h = averaged.values();
                let (eta, eps) = (cfg.eta, *epsilon);
                let apply = |t: &mut f64, &g: &f64, &hs: &f64| *t -= eta / (hs + eps) * (g / nb);
                Zip::from(&mut theta.w).and(&delta.dw).and(&h.dw).for_each(apply);
                Zip::from(&mut theta.b).and(&delta.db).and(&h.db).for_each(apply);
                Zip::from(&mut theta.c).and(&delta.dc).and(&h.dc).for_each(apply);
                **state = Some(averaged);
            }
        }
    }
    *params = theta;
    Ok(chains)
}

/// S-DCP: `∇g` fixed at loop entry, then `d` inner steps
/// `θ̃ ← θ̃ − η Σ(neg − pos) / N_B`, each after `K′` Gibbs steps that continue
/// the chains of the previous inner step.
pub fn sdcp_update(state: &mut OptimizerState, batch: &[BinaryVector], cfg: &TrainConfig) -> Result<()> {
    check_batch(&state.params, batch, cfg.eta)?;
    if cfg.d == 0 || cfg.k_prime == 0 {
        return Err(RbmError::invalid("d and k_prime must be at least 1"));
    }
    let rng = state.next_update_rng();
    dcp_update(&mut state.params, rng, batch, cfg, InnerStep::Plain)?;
    Ok(())
}

/// S-DCP-D: S-DCP whose inner step for parameter `s` is scaled by
/// `1 / (H_s + ε)`, where `H` is the running average of `p(1 − p)` over the
/// batch-mean model statistics `p`, updated once per inner iteration.
pub fn sdcpd_update(state: &mut OptimizerState, batch: &[BinaryVector], cfg: &TrainConfig) -> Result<()> {
    check_batch(&state.params, batch, cfg.eta)?;
    if cfg.d == 0 || cfg.k_prime == 0 {
        return Err(RbmError::invalid("d and k_prime must be at least 1"));
    }
    if cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return Err(RbmError::invalid(format!("epsilon = {} must be positive", cfg.epsilon)));
    }
    if !(0.0..=1.0).contains(&cfg.lambda_h) {
        return Err(RbmError::invalid(format!("lambda_h = {} outside [0, 1]", cfg.lambda_h)));
    }
    let rng = state.next_update_rng();
    dcp_update(
        &mut state.params,
        rng,
        batch,
        cfg,
        InnerStep::Diagonal {
            epsilon: cfg.epsilon,
            lambda_h: cfg.lambda_h,
            state: &mut state.hess_ema,
        },
    )?;
    Ok(())
}

/// Dispatches on `cfg.algorithm`.
pub fn apply_update(state: &mut OptimizerState, batch: &[BinaryVector], cfg: &TrainConfig) -> Result<()> {
    use super::config::Algorithm::*;
    match cfg.algorithm {
        Cd => cd_update(state, batch, cfg),
        Pcd => pcd_update(state, batch, cfg),
        Cg => cg_update(state, batch, cfg),
        Sdcp => sdcp_update(state, batch, cfg),
        Sdcpd => sdcpd_update(state, batch, cfg),
    }
}
