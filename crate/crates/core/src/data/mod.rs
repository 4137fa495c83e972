//! Datasets: Bars & Stripes synthesis, IDX/BMAT ingestion, binarization and
//! minibatch iteration.

mod bars_stripes;
mod binary_formats;

pub use bars_stripes::{bars_stripes_dataset, bars_stripes_distribution, is_bars_or_stripes, BarsStripesMode};
pub use binary_formats::{
    binarize, decode_bmat, decode_idx, encode_bmat, encode_idx, load_idx, read_bmat, write_bmat, BinarizeMode,
    ImageSet, BMAT_MAGIC, IDX_MAGIC_IMAGES, IDX_MAGIC_LABELS,
};

use crate::error::{check_len, RbmError, Result};
use crate::model::BinaryVector;
use crate::sampling::RngStream;

/// Binary training or test set, optionally with per-row integer
/// multiplicities (a weighted row counts as that many identical rows).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    rows: Vec<BinaryVector>,
    dim: usize,
    weights: Option<Vec<u32>>,
}

impl BinaryDataset {
    pub fn new(rows: Vec<BinaryVector>, dim: usize) -> Result<Self> {
        for row in &rows {
            check_len("dataset row", dim, row.len())?;
        }
        Ok(Self {
            rows,
            dim,
            weights: None,
        })
    }

    pub fn with_weights(rows: Vec<BinaryVector>, dim: usize, weights: Vec<u32>) -> Result<Self> {
        check_len("weight vector", rows.len(), weights.len())?;
        if weights.contains(&0) {
            return Err(RbmError::invalid("row multiplicities must be at least 1"));
        }
        let mut data = Self::new(rows, dim)?;
        if weights.iter().any(|&w| w != 1) {
            data.weights = Some(weights);
        }
        Ok(data)
    }

    /// Builds a dataset from rows, inferring the dimension from the first.
    pub fn from_rows(rows: Vec<BinaryVector>) -> Result<Self> {
        let dim = rows.first().map(BinaryVector::len).ok_or(RbmError::EmptyDataset)?;
        Self::new(rows, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored rows (distinct rows for a weighted set).
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[BinaryVector] {
        &self.rows
    }

    pub fn weights(&self) -> Option<&[u32]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, k: usize) -> u32 {
        self.weights.as_ref().map_or(1, |w| w[k])
    }

    pub fn iter_weighted(&self) -> impl Iterator<Item = (&BinaryVector, u32)> {
        self.rows.iter().enumerate().map(|(k, r)| (r, self.weight(k)))
    }

    /// Sum of multiplicities; equals `len()` for an unweighted set.
    pub fn total_weight(&self) -> u64 {
        self.iter_weighted().map(|(_, w)| u64::from(w)).sum()
    }

    /// Rows repeated according to their multiplicities.
    pub fn expanded(&self) -> Vec<BinaryVector> {
        self.iter_weighted()
            .flat_map(|(r, w)| std::iter::repeat_n(r.clone(), w as usize))
            .collect()
    }

    /// Weighted mean of each visible unit.
    pub fn column_means(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(RbmError::EmptyDataset);
        }
        let mut sums = vec![0.0; self.dim];
        for (row, w) in self.iter_weighted() {
            for (s, &b) in sums.iter_mut().zip(row.bits()) {
                *s += f64::from(w) * f64::from(b);
            }
        }
        let total = self.total_weight() as f64;
        Ok(sums.into_iter().map(|s| s / total).collect())
    }

    /// The first `count` rows with their weights.
    pub fn take(&self, count: usize) -> Self {
        let count = count.min(self.len());
        let rows = self.rows[..count].to_vec();
        let weights = self
            .weights
            .as_ref()
            .map(|w| w[..count].iter().any(|&x| x != 1).then(|| w[..count].to_vec()));
        Self {
            rows,
            dim: self.dim,
            weights: weights.flatten(),
        }
    }

    /// `weight,v0,v1,…` per row, with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("weight");
        for j in 0..self.dim {
            out.push_str(&format!(",v{j}"));
        }
        out.push('\n');
        for (row, w) in self.iter_weighted() {
            out.push_str(&w.to_string());
            for &b in row.bits() {
                out.push(',');
                out.push(if b == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Splits `rows` into batches of `batch_size` (the last may be shorter),
/// visiting each row exactly once. With `shuffle`, the order is a fresh
/// permutation drawn from `rng`.
pub fn minibatches<'a>(
    rows: &'a [BinaryVector],
    batch_size: usize,
    shuffle: bool,
    rng: &mut RngStream,
) -> Result<impl Iterator<Item = Vec<BinaryVector>> + 'a> {
    if batch_size == 0 {
        return Err(RbmError::invalid("batch size must be at least 1"));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    if shuffle {
        rng.shuffle(&mut order);
    }
    let batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    Ok(batches
        .into_iter()
        .map(move |idx| idx.into_iter().map(|k| rows[k].clone()).collect()))
}
