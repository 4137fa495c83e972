//! RBM parameters, energy, conditionals, and exact likelihood by enumeration.

mod serialize;

pub use serialize::{read_params, write_params_json, write_params_rbmp, ParamsJson, RBMP_MAGIC, RBMP_VERSION};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{check_len, RbmError, Result};
use crate::numeric::{logistic, softplus, LogSumExp};
use crate::sampling::RngStream;

/// Largest layer size that exact enumeration accepts unless overridden.
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// A configuration of binary units; every entry is exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BinaryVector(Vec<u8>);

impl BinaryVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(RbmError::invalid(format!(
                "bit {pos} has value {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1; len])
    }

    /// Unit `j` takes bit `j` of `index`.
    pub fn from_index(index: u64, len: usize) -> Self {
        Self((0..len).map(|j| ((index >> j) & 1) as u8).collect())
    }

    /// Inverse of [`BinaryVector::from_index`]; only meaningful for `len <= 64`.
    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j))
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self(bits.into_iter().map(u8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u8 {
        self.0[j]
    }

    pub fn set(&mut self, j: usize, bit: bool) {
        self.0[j] = u8::from(bit);
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_f64(&self) -> Array1<f64> {
        self.0.iter().map(|&b| f64::from(b)).collect()
    }
}

impl TryFrom<Vec<u8>> for BinaryVector {
    type Error = RbmError;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BinaryVector> for Vec<u8> {
    fn from(v: BinaryVector) -> Self {
        v.0
    }
}

/// RBM parameters θ = (w, b, c) with `w` stored hidden × visible.
///
/// All entries must be finite and `w` must be `c.len() × b.len()`; the
/// constructors enforce this, and code mutating the public fields directly
/// is expected to preserve it (see [`RbmParams::validate`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub c: Array1<f64>,
}

impl RbmParams {
    pub fn new(w: Array2<f64>, b: Array1<f64>, c: Array1<f64>) -> Result<Self> {
        let params = Self { w, b, c };
        params.validate()?;
        Ok(params)
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            w: Array2::zeros((n_hidden, n_visible)),
            b: Array1::zeros(n_visible),
            c: Array1::zeros(n_hidden),
        }
    }

    /// Every entry drawn i.i.d. from `N(0, sd²)`.
    pub fn random_normal(n_visible: usize, n_hidden: usize, sd: f64, rng: &mut RngStream) -> Self {
        let normal = Normal::new(0.0, sd).expect("standard deviation must be finite and >= 0");
        let mut draw = || normal.sample(rng.inner_mut());
        let w = Array2::from_shape_simple_fn((n_hidden, n_visible), &mut draw);
        let b = Array1::from_shape_simple_fn(n_visible, &mut draw);
        let c = Array1::from_shape_simple_fn(n_hidden, &mut draw);
        Self { w, b, c }
    }

    pub fn n_visible(&self) -> usize {
        self.b.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.c.len()
    }

    /// Number of scalar parameters, `mn + m + n`.
    pub fn len(&self) -> usize {
        self.w.len() + self.b.len() + self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        check_len("weight rows (hidden units)", self.c.len(), self.w.nrows())?;
        check_len("weight columns (visible units)", self.b.len(), self.w.ncols())?;
        if !self.is_finite() {
            return Err(RbmError::NonFinite("RBM parameters contain NaN or Inf".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.b).chain(&self.c).all(|x| x.is_finite())
    }

    /// The parameters of the RBM with visible and hidden layers exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            w: self.w.t().to_owned(),
            b: self.c.clone(),
            c: self.b.clone(),
        }
    }

    /// `θ ← θ + scale · stats`, elementwise.
    pub fn add_scaled(&mut self, stats: &ParamStats, scale: f64) {
        self.w.scaled_add(scale, &stats.dw);
        self.b.scaled_add(scale, &stats.db);
        self.c.scaled_add(scale, &stats.dc);
    }

    /// Flattened view in the canonical parameter order: `w` row-major, then
    /// `b`, then `c`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.w.iter().chain(&self.b).chain(&self.c).copied().collect()
    }

    /// Inverse of [`RbmParams::to_flat`].
    pub fn from_flat(n_visible: usize, n_hidden: usize, flat: &[f64]) -> Result<Self> {
        let nw = n_visible * n_hidden;
        check_len("flat parameter vector", nw + n_visible + n_hidden, flat.len())?;
        let w = Array2::from_shape_vec((n_hidden, n_visible), flat[..nw].to_vec())
            .map_err(|e| RbmError::invalid(e.to_string()))?;
        let b = Array1::from(flat[nw..nw + n_visible].to_vec());
        let c = Array1::from(flat[nw + n_visible..].to_vec());
        Self::new(w, b, c)
    }

    pub(crate) fn check_visible(&self, v: &BinaryVector) -> Result<()> {
        check_len("visible vector", self.n_visible(), v.len())
    }

    pub(crate) fn check_hidden(&self, h: &BinaryVector) -> Result<()> {
        check_len("hidden vector", self.n_hidden(), h.len())
    }
}

/// One value per parameter, shaped like [`RbmParams`]. Holds gradients,
/// sufficient-statistic means and Hessian diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStats {
    pub dw: Array2<f64>,
    pub db: Array1<f64>,
    pub dc: Array1<f64>,
}

impl ParamStats {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            dw: Array2::zeros((n_hidden, n_visible)),
            db: Array1::zeros(n_visible),
            dc: Array1::zeros(n_hidden),
        }
    }

    pub fn zeros_like(params: &RbmParams) -> Self {
        Self::zeros(params.n_visible(), params.n_hidden())
    }

    pub fn filled(n_visible: usize, n_hidden: usize, value: f64) -> Self {
        Self {
            dw: Array2::from_elem((n_hidden, n_visible), value),
            db: Array1::from_elem(n_visible, value),
            dc: Array1::from_elem(n_hidden, value),
        }
    }

    pub fn n_visible(&self) -> usize {
        self.db.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.dc.len()
    }

    pub fn len(&self) -> usize {
        self.dw.len() + self.db.len() + self.dc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &ParamStats) -> bool {
        self.dw.dim() == other.dw.dim() && self.db.len() == other.db.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.dw.iter().chain(&self.db).chain(&self.dc)
    }

    /// Canonical order, matching [`RbmParams::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dw: self.dw.mapv(&f),
            db: self.db.mapv(&f),
            dc: self.dc.mapv(&f),
        }
    }

    pub fn zip_map(&self, other: &ParamStats, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.same_shape(other), "ParamStats shapes differ");
        let mut out = self.clone();
        out.dw.zip_mut_with(&other.dw, |a, &b| *a = f(*a, b));
        out.db.zip_mut_with(&other.db, |a, &b| *a = f(*a, b));
        out.dc.zip_mut_with(&other.dc, |a, &b| *a = f(*a, b));
        out
    }

    pub fn fill(&mut self, value: f64) {
        self.dw.fill(value);
        self.db.fill(value);
        self.dc.fill(value);
    }

    pub fn scale(&mut self, factor: f64) {
        self.dw *= factor;
        self.db *= factor;
        self.dc *= factor;
    }

    pub fn add_assign(&mut self, other: &ParamStats) {
        self.dw += &other.dw;
        self.db += &other.db;
        self.dc += &other.dc;
    }

    pub fn max_abs_diff(&self, other: &ParamStats) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `E(v,h;θ) = −hᵀ w v − bᵀv − cᵀh`.
pub fn energy(params: &RbmParams, v: &BinaryVector, h: &BinaryVector) -> Result<f64> {
    params.check_visible(v)?;
    params.check_hidden(h)?;
    let vf = v.to_f64();
    let hf = h.to_f64();
    let coupling = hf.dot(&params.w.dot(&vf));
    Ok(-coupling - params.b.dot(&vf) - params.c.dot(&hf))
}

/// Hidden pre-activations `w v + c`.
pub(crate) fn hidden_input(params: &RbmParams, v: &BinaryVector) -> Array1<f64> {
    let mut input = params.c.clone();
    for (j, &bit) in v.bits().iter().enumerate() {
        if bit == 1 {
            input += &params.w.column(j);
        }
    }
    input
}

/// Visible pre-activations `wᵀ h + b`.
pub(crate) fn visible_input(params: &RbmParams, h: &BinaryVector) -> Array1<f64> {
    let mut input = params.b.clone();
    for (i, &bit) in h.bits().iter().enumerate() {
        if bit == 1 {
            input += &params.w.row(i);
        }
    }
    input
}

/// `p(h_i = 1 | v) = σ(Σ_j w_ij v_j + c_i)`.
pub fn hidden_probs(params: &RbmParams, v: &BinaryVector) -> Result<Array1<f64>> {
    params.check_visible(v)?;
    Ok(hidden_input(params, v).mapv_into(logistic))
}

/// `p(v_j = 1 | h) = σ(Σ_i w_ij h_i + b_j)`.
pub fn visible_probs(params: &RbmParams, h: &BinaryVector) -> Result<Array1<f64>> {
    params.check_hidden(h)?;
    Ok(visible_input(params, h).mapv_into(logistic))
}

/// `g(θ, v) = log Σ_h e^{−E(v,h)} = bᵀv + Σ_i softplus(w_i·v + c_i)`.
pub fn g_value(params: &RbmParams, v: &BinaryVector) -> Result<f64> {
    params.check_visible(v)?;
    Ok(g_value_unchecked(params, v))
}

pub(crate) fn g_value_unchecked(params: &RbmParams, v: &BinaryVector) -> f64 {
    let linear: f64 = v
        .bits()
        .iter()
        .zip(&params.b)
        .filter(|(&bit, _)| bit == 1)
        .map(|(_, &b)| b)
        .sum();
    linear + hidden_input(params, v).iter().map(|&x| softplus(x)).sum::<f64>()
}

/// Which layer an exact enumeration sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationSide {
    /// The smaller layer (visible on ties).
    Auto,
    Visible,
    Hidden,
}

impl EnumerationSide {
    fn resolve(self, params: &RbmParams) -> EnumerationSide {
        match self {
            EnumerationSide::Auto if params.n_hidden() < params.n_visible() => EnumerationSide::Hidden,
            EnumerationSide::Auto => EnumerationSide::Visible,
            side => side,
        }
    }
}

/// Visits every configuration of one layer in Gray-code order.
///
/// `couplings` has one row per enumerated unit holding that unit's
/// contribution to the other layer's input. The visitor receives the state
/// as a bit mask, the log of the unnormalized marginal (other layer summed
/// out analytically), and the other layer's current input vector.
pub(crate) fn enumerate_layer(
    own_bias: ArrayView1<f64>,
    other_bias: ArrayView1<f64>,
    couplings: ArrayView2<f64>,
    mut visit: impl FnMut(u64, f64, &Array1<f64>),
) {
    let k = own_bias.len();
    assert!(k < 64, "cannot enumerate {k} units");
    let mut input = other_bias.to_owned();
    let mut linear = 0.0;
    let mut state: u64 = 0;
    let log_weight = |linear: f64, input: &Array1<f64>| linear + input.iter().map(|&x| softplus(x)).sum::<f64>();
    visit(state, log_weight(linear, &input), &input);
    for step in 1u64..(1u64 << k) {
        let r = step.trailing_zeros() as usize;
        state ^= 1 << r;
        if state & (1 << r) != 0 {
            input += &couplings.row(r);
            linear += own_bias[r];
        } else {
            input -= &couplings.row(r);
            linear -= own_bias[r];
        }
        visit(state, log_weight(linear, &input), &input);
    }
}

/// Runs [`enumerate_layer`] on the requested side of `params`.
pub(crate) fn enumerate_side(
    params: &RbmParams,
    side: EnumerationSide,
    visit: impl FnMut(u64, f64, &Array1<f64>),
) -> EnumerationSide {
    match side.resolve(params) {
        EnumerationSide::Hidden => {
            enumerate_layer(params.c.view(), params.b.view(), params.w.view(), visit);
            EnumerationSide::Hidden
        }
        _ => {
            enumerate_layer(params.b.view(), params.c.view(), params.w.view().reversed_axes(), visit);
            EnumerationSide::Visible
        }
    }
}

fn check_cap(params: &RbmParams, side: EnumerationSide, cap: usize) -> Result<()> {
    let units = match side.resolve(params) {
        EnumerationSide::Hidden => params.n_hidden(),
        _ => params.n_visible(),
    };
    if units > cap || units >= 64 {
        Err(RbmError::IntractableSize { units, cap })
    } else {
        Ok(())
    }
}

/// `log Z_θ` by enumerating the smaller layer, with the default cap.
pub fn exact_log_partition(params: &RbmParams) -> Result<f64> {
    exact_log_partition_with(params, EnumerationSide::Auto, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_log_partition_with(params: &RbmParams, side: EnumerationSide, cap: usize) -> Result<f64> {
    check_cap(params, side, cap)?;
    let mut acc = LogSumExp::default();
    enumerate_side(params, side, |_, log_w, _| acc.push(log_w));
    Ok(acc.value())
}

/// `log p(v)` for every visible configuration, indexed as in
/// [`BinaryVector::from_index`].
pub fn exact_visible_log_probs(params: &RbmParams) -> Result<Vec<f64>> {
    check_cap(params, EnumerationSide::Visible, DEFAULT_ENUMERATION_CAP)?;
    let mut log_weights = vec![0.0; 1usize << params.n_visible()];
    let mut acc = LogSumExp::default();
    enumerate_side(params, EnumerationSide::Visible, |state, log_w, _| {
        log_weights[state as usize] = log_w;
        acc.push(log_w);
    });
    let log_z = acc.value();
    log_weights.iter_mut().for_each(|lw| *lw -= log_z);
    Ok(log_weights)
}

/// Mean of `log p(v)` over a dataset (weighted by row multiplicities).
pub fn exact_avg_log_likelihood(params: &RbmParams, data: &BinaryDataset) -> Result<f64> {
    let log_z = exact_log_partition(params)?;
    mean_g_value(params, data).map(|g| g - log_z)
}

/// Weighted mean of [`g_value`] over the dataset.
pub fn mean_g_value(params: &RbmParams, data: &BinaryDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(RbmError::EmptyDataset);
    }
    check_len("dataset dimension", params.n_visible(), data.dim())?;
    let mut total = 0.0;
    for (row, weight) in data.iter_weighted() {
        total += weight as f64 * g_value_unchecked(params, row);
    }
    Ok(total / data.total_weight() as f64)
}
