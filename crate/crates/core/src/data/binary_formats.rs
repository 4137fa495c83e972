//! IDX image files, the packed-bit `BMAT` matrix format, and binarization.

use std::fs;
use std::path::Path;

use super::BinaryDataset;
use crate::error::{RbmError, Result};
use crate::model::BinaryVector;
use crate::sampling::RngStream;

pub const IDX_MAGIC_IMAGES: u32 = 0x0000_0803;
pub const IDX_MAGIC_LABELS: u32 = 0x0000_0801;
pub const BMAT_MAGIC: &[u8; 4] = b"BMAT";

/// Real-valued images in `[0, 1]`, each flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    /// Per-item shape from the IDX header (e.g. `[28, 28]`); empty for scalars.
    pub item_shape: Vec<usize>,
    pub images: Vec<Vec<f64>>,
}

impl ImageSet {
    pub fn item_len(&self) -> usize {
        self.item_shape.iter().product()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Parses an unsigned-byte IDX file (`0x00 0x00 0x08 ndim`, big-endian
/// dimensions). Pixel values are scaled by 1/255.
pub fn decode_idx(bytes: &[u8]) -> Result<ImageSet> {
    if bytes.len() < 4 {
        return Err(RbmError::format("IDX file shorter than its magic number"));
    }
    let magic = u32::from_be_bytes(bytes[..4].try_into().unwrap());
    if magic != IDX_MAGIC_IMAGES && magic != IDX_MAGIC_LABELS && magic != 0x0000_0802 {
        return Err(RbmError::format(format!("bad IDX magic {magic:#010x}")));
    }
    let ndim = (magic & 0xff) as usize;
    let header = 4 + 4 * ndim;
    if bytes.len() < header {
        return Err(RbmError::format("truncated IDX header"));
    }
    let dims: Vec<usize> = (0..ndim)
        .map(|k| u32::from_be_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize)
        .collect();
    let count = dims[0];
    let item_shape = dims[1..].to_vec();
    let item_len = item_shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| RbmError::format("IDX dimensions overflow"))?;
    let payload = count
        .checked_mul(item_len)
        .ok_or_else(|| RbmError::format("IDX dimensions overflow"))?;
    let body = &bytes[header..];
    if body.len() < payload {
        return Err(RbmError::format(format!(
            "truncated IDX payload: {} bytes, expected {payload}",
            body.len()
        )));
    }
    let images = if item_len == 0 {
        vec![Vec::new(); count]
    } else {
        body[..payload]
            .chunks_exact(item_len)
            .map(|c| c.iter().map(|&b| f64::from(b) / 255.0).collect())
            .collect()
    };
    Ok(ImageSet { item_shape, images })
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<ImageSet> {
    decode_idx(&fs::read(path)?)
}

/// Serializes images back to IDX ubyte, mapping intensities to
/// `round(255·x)`.
pub fn encode_idx(set: &ImageSet) -> Result<Vec<u8>> {
    let ndim = 1 + set.item_shape.len();
    if ndim > 3 {
        return Err(RbmError::invalid("IDX encoding supports at most 2 item dimensions"));
    }
    let mut out = Vec::with_capacity(4 + 4 * ndim + set.len() * set.item_len());
    out.extend_from_slice(&(0x0000_0800u32 | ndim as u32).to_be_bytes());
    out.extend_from_slice(&(set.len() as u32).to_be_bytes());
    for &d in &set.item_shape {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for img in &set.images {
        if img.len() != set.item_len() {
            return Err(RbmError::Shape {
                what: "image length",
                expected: set.item_len(),
                actual: img.len(),
            });
        }
        out.extend(img.iter().map(|&x| (x.clamp(0.0, 1.0) * 255.0).round() as u8));
    }
    Ok(out)
}

/// Binarization rule for real-valued intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinarizeMode {
    /// `bit = intensity >= t`.
    Threshold(f64),
    /// `bit ~ Bernoulli(intensity)`, drawn once from the given seed.
    Stochastic { seed: u64 },
}

pub fn binarize(images: &ImageSet, mode: BinarizeMode) -> Result<BinaryDataset> {
    if let Some(x) = images.images.iter().flatten().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(RbmError::invalid(format!("intensity {x} outside [0, 1]")));
    }
    let rows = match mode {
        BinarizeMode::Threshold(t) => images
            .images
            .iter()
            .map(|img| BinaryVector::from_bools(img.iter().map(|&x| x >= t)))
            .collect(),
        BinarizeMode::Stochastic { seed } => {
            let mut rng = RngStream::new(seed);
            images
                .images
                .iter()
                .map(|img| BinaryVector::from_bools(img.iter().map(|&x| rng.bernoulli(x))))
                .collect()
        }
    };
    BinaryDataset::new(rows, images.item_len())
}

/// `BMAT` container: magic, `N` (u64 LE), `m` (u64 LE), then each row packed
/// into `ceil(m/8)` bytes, most significant bit first. Multiplicities are not
/// stored; weighted sets are written expanded.
pub fn encode_bmat(data: &BinaryDataset) -> Vec<u8> {
    let rows = data.expanded();
    let stride = data.dim().div_ceil(8);
    let mut out = Vec::with_capacity(20 + rows.len() * stride);
    out.extend_from_slice(BMAT_MAGIC);
    out.extend_from_slice(&(rows.len() as u64).to_le_bytes());
    out.extend_from_slice(&(data.dim() as u64).to_le_bytes());
    for row in &rows {
        let mut packed = vec![0u8; stride];
        for (j, &b) in row.bits().iter().enumerate() {
            packed[j / 8] |= b << (7 - j % 8);
        }
        out.extend_from_slice(&packed);
    }
    out
}

pub fn decode_bmat(bytes: &[u8]) -> Result<BinaryDataset> {
    if bytes.len() < 20 || &bytes[..4] != BMAT_MAGIC {
        return Err(RbmError::format("not a BMAT file"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let m = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let stride = m.div_ceil(8);
    let payload = n
        .checked_mul(stride)
        .ok_or_else(|| RbmError::format("BMAT dimensions overflow"))?;
    let body = &bytes[20..];
    if body.len() != payload {
        return Err(RbmError::format(format!(
            "BMAT payload is {} bytes, expected {payload}",
            body.len()
        )));
    }
    let rows = (0..n)
        .map(|k| {
            let packed = &body[k * stride..(k + 1) * stride];
            BinaryVector::from_bools((0..m).map(|j| (packed[j / 8] >> (7 - j % 8)) & 1 == 1))
        })
        .collect();
    BinaryDataset::new(rows, m)
}

pub fn write_bmat(data: &BinaryDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_bmat(data))?;
    Ok(())
}

pub fn read_bmat(path: impl AsRef<Path>) -> Result<BinaryDataset> {
    decode_bmat(&fs::read(path)?)
}
