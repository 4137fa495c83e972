//! Parameter files: the `RBMP` binary container and a JSON equivalent.
//!
//! `RBMP` layout (all little-endian):
//!
//! ```text
//! offset  size      field
//! 0       4         magic "RBMP"
//! 4       4         version (u32) = 1
//! 8       4         m, visible units (u32)
//! 12      4         n, hidden units (u32)
//! 16      8·n·m     w, row-major n × m f64
//! ...     8·m       b
//! ...     8·n       c
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::RbmParams;
use crate::error::{RbmError, Result};

pub const RBMP_MAGIC: &[u8; 4] = b"RBMP";
pub const RBMP_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

/// JSON interchange form; `w` is the row-major flattening of the n × m matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub m: usize,
    pub n: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl From<&RbmParams> for ParamsJson {
    fn from(p: &RbmParams) -> Self {
        Self {
            m: p.n_visible(),
            n: p.n_hidden(),
            w: p.w.iter().copied().collect(),
            b: p.b.to_vec(),
            c: p.c.to_vec(),
        }
    }
}

impl TryFrom<ParamsJson> for RbmParams {
    type Error = RbmError;

    fn try_from(j: ParamsJson) -> Result<Self> {
        if j.w.len() != j.m * j.n || j.b.len() != j.m || j.c.len() != j.n {
            return Err(RbmError::format(format!(
                "JSON parameter lengths (w={}, b={}, c={}) inconsistent with m={}, n={}",
                j.w.len(),
                j.b.len(),
                j.c.len(),
                j.m,
                j.n
            )));
        }
        let w = Array2::from_shape_vec((j.n, j.m), j.w).map_err(|e| RbmError::format(e.to_string()))?;
        RbmParams::new(w, Array1::from(j.b), Array1::from(j.c))
    }
}

impl RbmParams {
    pub fn to_rbmp_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.len());
        out.extend_from_slice(RBMP_MAGIC);
        out.extend_from_slice(&RBMP_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_visible() as u32).to_le_bytes());
        out.extend_from_slice(&(self.n_hidden() as u32).to_le_bytes());
        for x in self.w.iter().chain(&self.b).chain(&self.c) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_rbmp_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(RbmError::format("RBMP file shorter than its 16-byte header"));
        }
        if &bytes[..4] != RBMP_MAGIC {
            return Err(RbmError::format("bad RBMP magic"));
        }
        let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap());
        let version = word(1);
        if version != RBMP_VERSION {
            return Err(RbmError::format(format!("unsupported RBMP version {version}")));
        }
        let (m, n) = (word(2) as usize, word(3) as usize);
        let count = m
            .checked_mul(n)
            .and_then(|mn| mn.checked_add(m + n))
            .ok_or_else(|| RbmError::format("RBMP dimensions overflow"))?;
        let expected = count
            .checked_mul(8)
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| RbmError::format("RBMP dimensions overflow"))?;
        if bytes.len() != expected {
            return Err(RbmError::format(format!(
                "RBMP payload is {} bytes, expected {expected} for m={m}, n={n}",
                bytes.len()
            )));
        }
        let flat: Vec<f64> = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        RbmParams::from_flat(m, n, &flat)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ParamsJson::from(self)).expect("params serialize to JSON")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: ParamsJson = serde_json::from_str(s)?;
        j.try_into()
    }
}

pub fn write_params_rbmp(params: &RbmParams, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&params.to_rbmp_bytes())?;
    Ok(())
}

pub fn write_params_json(params: &RbmParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, params.to_json_string())?;
    Ok(())
}

/// Reads either format, dispatching on the `RBMP` magic.
pub fn read_params(path: impl AsRef<Path>) -> Result<RbmParams> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(RBMP_MAGIC) {
        RbmParams::from_rbmp_bytes(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| RbmError::format("parameter file is neither RBMP nor UTF-8 JSON"))?;
        RbmParams::from_json_str(text)
    }
}
