use ndarray::{array, Array1};

use super::*;
use crate::model::exact_visible_log_probs;

fn total_variation(counts: &[u64], log_probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    0.5 * counts
        .iter()
        .zip(log_probs)
        .map(|(&c, lp)| (c as f64 / total as f64 - lp.exp()).abs())
        .sum::<f64>()
}

#[test]
fn zero_params_give_fair_coins() {
    let params = RbmParams::zeros(4, 3);
    let mut rng = RngStream::new(11);
    let mut v = BinaryVector::from_index(5, 4);
    let (mut ones, mut bits) = (0usize, 0usize);
    for _ in 0..100_000 {
        let (next, h) = gibbs_transition(&params, &v, &mut rng).unwrap();
        ones += next.count_ones() + h.count_ones();
        bits += 7;
        v = next;
    }
    assert!((ones as f64 / bits as f64 - 0.5).abs() < 0.01);
}

#[test]
fn saturated_hidden_bias_turns_all_hidden_on() {
    let mut params = RbmParams::zeros(3, 4);
    params.c = Array1::from_elem(4, 40.0);
    let mut rng = RngStream::new(2);
    for _ in 0..1000 {
        let (_, h) = gibbs_transition(&params, &BinaryVector::zeros(3), &mut rng).unwrap();
        assert_eq!(h, BinaryVector::ones(4));
    }
}

#[test]
fn transition_consumes_m_plus_n_uniforms() {
    let mut rng = RngStream::new(3);
    let params = RbmParams::random_normal(5, 3, 1.0, &mut rng);
    let mut r = RngStream::new(9);
    gibbs_transition(&params, &BinaryVector::zeros(5), &mut r).unwrap();
    assert_eq!(r.draws(), 8);
    let mut r = RngStream::new(9);
    run_chain(&params, &BinaryVector::zeros(5), 1, &mut r).unwrap();
    assert_eq!(r.draws(), 8);
    let mut r = RngStream::new(9);
    run_chain(&params, &BinaryVector::zeros(5), 7, &mut r).unwrap();
    assert_eq!(r.draws(), 56);
}

#[test]
fn draw_order_is_hidden_then_visible() {
    // Replay the uniforms by hand: first n decide h, next m decide v′.
    let mut rng = RngStream::new(4);
    let params = RbmParams::random_normal(3, 2, 2.0, &mut rng);
    let v = BinaryVector::new(vec![1, 0, 1]).unwrap();
    let mut r = RngStream::new(77);
    let (next, h) = gibbs_transition(&params, &v, &mut r).unwrap();

    let mut replay = RngStream::new(77);
    let us: Vec<f64> = (0..5).map(|_| replay.uniform()).collect();
    let ph = crate::model::hidden_probs(&params, &v).unwrap();
    let expect_h = BinaryVector::from_bools((0..2).map(|i| us[i] < ph[i]));
    assert_eq!(h, expect_h);
    let pv = crate::model::visible_probs(&params, &expect_h).unwrap();
    let expect_v = BinaryVector::from_bools((0..3).map(|j| us[2 + j] < pv[j]));
    assert_eq!(next, expect_v);
}

#[test]
fn run_chain_zero_steps_is_identity() {
    let params = RbmParams::zeros(4, 2);
    let v0 = BinaryVector::from_index(9, 4);
    let mut r = RngStream::new(1);
    assert_eq!(run_chain(&params, &v0, 0, &mut r).unwrap(), v0);
    assert_eq!(r.draws(), 0);
}

#[test]
fn run_chain_is_deterministic() {
    let mut rng = RngStream::new(8);
    let params = RbmParams::random_normal(6, 4, 1.0, &mut rng);
    let v0 = BinaryVector::from_index(33, 6);
    let a = run_chain(&params, &v0, 50, &mut RngStream::new(123)).unwrap();
    let b = run_chain(&params, &v0, 50, &mut RngStream::new(123)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shape_errors_are_reported() {
    let params = RbmParams::zeros(3, 2);
    let mut r = RngStream::new(0);
    assert!(gibbs_transition(&params, &BinaryVector::zeros(4), &mut r).is_err());
    assert!(run_chain(&params, &BinaryVector::zeros(2), 1, &mut r).is_err());
    assert!(generate_samples(&params, 0, 1, &r).is_err());
}

#[test]
fn chain_matches_exact_distribution_small_model() {
    let params = RbmParams::new(
        array![[1.2, -0.7, 0.4], [-0.9, 0.3, 1.1]],
        array![0.2, -0.4, 0.1],
        array![-0.3, 0.5],
    )
    .unwrap();
    let log_probs = exact_visible_log_probs(&params).unwrap();
    let mut rng = RngStream::new(2024);
    let mut v = BinaryVector::zeros(3);
    let mut h = BinaryVector::zeros(2);
    let mut counts = vec![0u64; 8];
    for _ in 0..1000 {
        gibbs_step(&params, &mut v, &mut h, &mut rng);
    }
    for _ in 0..1_000_000 {
        gibbs_step(&params, &mut v, &mut h, &mut rng);
        counts[v.to_index() as usize] += 1;
    }
    let tv = total_variation(&counts, &log_probs);
    assert!(tv < 0.01, "total variation {tv}");
}

#[test]
fn generated_samples_from_zero_model_are_fair() {
    let params = RbmParams::zeros(16, 4);
    let samples = generate_samples(&params, 2000, 3, &RngStream::new(5)).unwrap();
    let ones: usize = samples.iter().map(|s| s.count_ones()).sum();
    assert!((ones as f64 / (16.0 * 2000.0) - 0.5).abs() < 0.01);
    let again = generate_samples(&params, 2000, 3, &RngStream::new(5)).unwrap();
    assert_eq!(samples, again);
}

#[test]
fn default_steps_follow_dimension() {
    assert_eq!(default_sample_steps(784), 5000);
    assert_eq!(default_sample_steps(9), 200);
}
