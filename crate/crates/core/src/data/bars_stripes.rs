use std::collections::BTreeMap;

use super::BinaryDataset;
use crate::error::{RbmError, Result};
use crate::model::BinaryVector;
use crate::sampling::RngStream;

/// How to materialize the Bars & Stripes distribution as a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BarsStripesMode {
    /// Every reachable pattern once.
    Distinct,
    /// Every reachable pattern with an integer multiplicity proportional to
    /// its probability (the two constant patterns count twice).
    Weighted,
    /// `count` i.i.d. draws.
    Sampled { count: usize, seed: u64 },
}

fn bars_pattern(d: usize, rows: u64, rotated: bool) -> BinaryVector {
    BinaryVector::from_bools((0..d * d).map(|p| {
        let (y, x) = (p / d, p % d);
        // 90° clockwise rotation maps row y of the source to column D-1-y.
        let row = if rotated { d - 1 - x } else { y };
        (rows >> row) & 1 == 1
    }))
}

/// Exact distribution of D×D Bars & Stripes: each row is set to all-zeros or
/// all-ones with equal probability, then the pattern is rotated by 90° with
/// probability 1/2. Duplicate outcomes are merged; output is sorted by
/// pattern.
pub fn bars_stripes_distribution(d: usize) -> Result<Vec<(BinaryVector, f64)>> {
    if d == 0 {
        return Err(RbmError::invalid("Bars & Stripes side length must be at least 1"));
    }
    if d > 7 {
        return Err(RbmError::invalid("Bars & Stripes side length above 7 is not supported"));
    }
    let outcome_prob = 0.5 / (1u64 << d) as f64;
    let mut merged: BTreeMap<BinaryVector, f64> = BTreeMap::new();
    for rows in 0..(1u64 << d) {
        for rotated in [false, true] {
            *merged.entry(bars_pattern(d, rows, rotated)).or_default() += outcome_prob;
        }
    }
    Ok(merged.into_iter().collect())
}

/// Whether `v` is a D×D pattern with constant rows or constant columns.
pub fn is_bars_or_stripes(v: &BinaryVector, d: usize) -> bool {
    if v.len() != d * d {
        return false;
    }
    let bit = |y: usize, x: usize| v.get(y * d + x);
    let rows_constant = (0..d).all(|y| (0..d).all(|x| bit(y, x) == bit(y, 0)));
    let cols_constant = (0..d).all(|x| (0..d).all(|y| bit(y, x) == bit(0, x)));
    rows_constant || cols_constant
}

pub fn bars_stripes_dataset(d: usize, mode: BarsStripesMode) -> Result<BinaryDataset> {
    let dist = bars_stripes_distribution(d)?;
    let dim = d * d;
    match mode {
        BarsStripesMode::Distinct => BinaryDataset::new(dist.into_iter().map(|(p, _)| p).collect(), dim),
        BarsStripesMode::Weighted => {
            let unit = 0.5 / (1u64 << d) as f64;
            let weights = dist.iter().map(|(_, p)| (p / unit).round() as u32).collect();
            BinaryDataset::with_weights(dist.into_iter().map(|(p, _)| p).collect(), dim, weights)
        }
        BarsStripesMode::Sampled { count, seed } => {
            let mut rng = RngStream::new(seed);
            let rows = (0..count)
                .map(|_| {
                    let rows = (0..d).fold(0u64, |acc, k| acc | (u64::from(rng.bernoulli(0.5)) << k));
                    let rotated = rng.bernoulli(0.5);
                    bars_pattern(d, rows, rotated)
                })
                .collect();
            BinaryDataset::new(rows, dim)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: enumerate the 2·2^D generative outcomes directly from the
    /// two-step description and tally them.
    fn oracle(d: usize) -> BTreeMap<Vec<u8>, f64> {
        let mut tally = BTreeMap::new();
        let per = 1.0 / (2 * (1 << d)) as f64;
        for rows in 0..(1u32 << d) {
            let grid: Vec<Vec<u8>> = (0..d).map(|y| vec![((rows >> y) & 1) as u8; d]).collect();
            let flat: Vec<u8> = grid.iter().flatten().copied().collect();
            *tally.entry(flat).or_insert(0.0) += per;
            // rotate clockwise: new[y][x] = old[d-1-x][y]
            let rot: Vec<u8> = (0..d * d).map(|p| grid[d - 1 - p % d][p / d]).collect();
            *tally.entry(rot).or_insert(0.0) += per;
        }
        tally
    }

    #[test]
    fn d3_has_fourteen_patterns() {
        let dist = bars_stripes_distribution(3).unwrap();
        assert_eq!(dist.len(), 14);
        let constants: Vec<_> = dist.iter().filter(|(p, _)| p.count_ones() % 9 == 0).collect();
        assert_eq!(constants.len(), 2);
        for (p, prob) in &dist {
            let expected = if p.count_ones() % 9 == 0 { 1.0 / 8.0 } else { 1.0 / 16.0 };
            assert!((prob - expected).abs() < 1e-15);
        }
        let o = oracle(3);
        assert_eq!(o.len(), 14);
        for (p, prob) in &dist {
            assert!((o[p.bits()] - prob).abs() < 1e-15);
        }
    }

    #[test]
    fn d2_has_six_patterns() {
        assert_eq!(bars_stripes_distribution(2).unwrap().len(), 6);
        assert_eq!(oracle(2).len(), 6);
    }

    #[test]
    fn normalized_and_rotation_closed() {
        for d in 1..=5 {
            let dist = bars_stripes_distribution(d).unwrap();
            let total: f64 = dist.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let lookup: BTreeMap<_, _> = dist.iter().cloned().collect();
            for (p, prob) in &dist {
                let rot = BinaryVector::from_bools((0..d * d).map(|q| p.get((d - 1 - q % d) * d + q / d) == 1));
                assert!((lookup[&rot] - prob).abs() < 1e-15);
                assert!(is_bars_or_stripes(p, d));
            }
        }
        assert!(bars_stripes_distribution(0).is_err());
    }

    #[test]
    fn entropy_of_d3_distribution() {
        let h: f64 = bars_stripes_distribution(3)
            .unwrap()
            .iter()
            .map(|(_, p)| -p * p.ln())
            .sum();
        let expected = 12.0 * (1.0 / 16.0) * 16f64.ln() + 2.0 * (1.0 / 8.0) * 8f64.ln();
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 2.5994).abs() < 1e-4);
    }

    #[test]
    fn dataset_modes() {
        let distinct = bars_stripes_dataset(3, BarsStripesMode::Distinct).unwrap();
        assert_eq!(distinct.len(), 14);
        assert_eq!(distinct.total_weight(), 14);
        let weighted = bars_stripes_dataset(3, BarsStripesMode::Weighted).unwrap();
        assert_eq!(weighted.total_weight(), 16);
        for (row, w) in weighted.iter_weighted() {
            assert_eq!(w, if row.count_ones() % 9 == 0 { 2 } else { 1 });
        }
    }

    #[test]
    fn sampled_frequencies_match() {
        let count = 100_000;
        let data = bars_stripes_dataset(3, BarsStripesMode::Sampled { count, seed: 4 }).unwrap();
        let mut freq: BTreeMap<BinaryVector, f64> = BTreeMap::new();
        for r in data.rows() {
            *freq.entry(r.clone()).or_default() += 1.0 / count as f64;
        }
        for (p, prob) in bars_stripes_distribution(3).unwrap() {
            assert!((freq.get(&p).copied().unwrap_or(0.0) - prob).abs() < 0.005);
        }
        assert_eq!(freq.len(), 14);
    }

    #[test]
    fn pattern_membership() {
        assert!(is_bars_or_stripes(
            &BinaryVector::new(vec![1, 1, 1, 0, 0, 0, 1, 1, 1]).unwrap(),
            3
        ));
        assert!(is_bars_or_stripes(
            &BinaryVector::new(vec![1, 0, 0, 1, 0, 0, 1, 0, 0]).unwrap(),
            3
        ));
        assert!(!is_bars_or_stripes(
            &BinaryVector::new(vec![1, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap(),
            3
        ));
    }
}
