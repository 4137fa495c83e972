//! Binary PGM (P5) image grids of visible-unit samples.

use crate::error::{RbmError, Result};
use crate::model::BinaryVector;

/// Arrangement of tiles in an output image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLayout {
    pub tile_width: usize,
    pub tile_height: usize,
    pub columns: usize,
    pub rows: usize,
}

impl GridLayout {
    /// Square tiles when `dim` is a perfect square, otherwise one pixel row
    /// per sample. Tiles are arranged in the most nearly square rectangle
    /// that holds exactly `count` of them.
    pub fn for_samples(dim: usize, count: usize) -> Self {
        let side = (dim as f64).sqrt().round() as usize;
        let (tile_width, tile_height) = if side * side == dim { (side, side) } else { (dim, 1) };
        let rows = (1..=count)
            .take_while(|r| r * r <= count)
            .filter(|r| count.is_multiple_of(*r))
            .last()
            .unwrap_or(1);
        Self {
            tile_width,
            tile_height,
            columns: count / rows.max(1),
            rows,
        }
    }

    pub fn width(&self) -> usize {
        self.tile_width * self.columns
    }

    pub fn height(&self) -> usize {
        self.tile_height * self.rows
    }
}

/// Encodes samples row-major into tiles; an active unit is white (255).
pub fn encode_pgm_grid(samples: &[BinaryVector], layout: GridLayout) -> Result<Vec<u8>> {
    let dim = layout.tile_width * layout.tile_height;
    if samples.len() != layout.columns * layout.rows {
        return Err(RbmError::invalid(format!(
            "{} samples do not fill a {}x{} grid",
            samples.len(),
            layout.columns,
            layout.rows
        )));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != dim) {
        return Err(RbmError::Shape {
            what: "sample length vs tile size",
            expected: dim,
            actual: s.len(),
        });
    }
    let (width, height) = (layout.width(), layout.height());
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    let header = out.len();
    out.resize(header + width * height, 0);
    for (k, sample) in samples.iter().enumerate() {
        let (tr, tc) = (k / layout.columns, k % layout.columns);
        for (p, &bit) in sample.bits().iter().enumerate() {
            let (y, x) = (p / layout.tile_width, p % layout.tile_width);
            let row = tr * layout.tile_height + y;
            let col = tc * layout.tile_width + x;
            out[header + row * width + col] = if bit == 1 { 255 } else { 0 };
        }
    }
    Ok(out)
}

/// A decoded P5 image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub max_value: u16,
    pub pixels: Vec<u8>,
}

/// Parses an 8-bit binary PGM, including `#` comments in the header.
pub fn decode_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let mut pos = 0;
    let mut next_token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(RbmError::format("truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if next_token()? != "P5" {
        return Err(RbmError::format("not a binary PGM (P5)"));
    }
    let mut number = |what: &str| -> Result<usize> {
        next_token()?
            .parse()
            .map_err(|_| RbmError::format(format!("bad PGM {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let max_value = number("max value")?;
    if max_value == 0 || max_value > 255 {
        return Err(RbmError::format("only 8-bit PGM is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let pixels = bytes
        .get(start..start + width * height)
        .ok_or_else(|| RbmError::format("truncated PGM raster"))?
        .to_vec();
    Ok(PgmImage {
        width,
        height,
        max_value: max_value as u16,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_for_common_counts() {
        let l = GridLayout::for_samples(784, 25);
        assert_eq!((l.tile_width, l.tile_height, l.columns, l.rows), (28, 28, 5, 5));
        assert_eq!((l.width(), l.height()), (140, 140));
        let l = GridLayout::for_samples(9, 10);
        assert_eq!((l.tile_width, l.columns, l.rows), (3, 5, 2));
        let l = GridLayout::for_samples(10, 7);
        assert_eq!((l.tile_width, l.tile_height, l.columns, l.rows), (10, 1, 7, 1));
    }

    #[test]
    fn grid_roundtrips_through_parser() {
        let samples: Vec<BinaryVector> = (0..4).map(|i| BinaryVector::from_index(i * 3 + 1, 4)).collect();
        let layout = GridLayout::for_samples(4, 4);
        let bytes = encode_pgm_grid(&samples, layout).unwrap();
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!((img.width, img.height, img.max_value), (4, 4, 255));
        for (k, s) in samples.iter().enumerate() {
            let (tr, tc) = (k / 2, k % 2);
            for p in 0..4 {
                let px = img.pixels[(tr * 2 + p / 2) * 4 + tc * 2 + p % 2];
                assert_eq!(px, if s.get(p) == 1 { 255 } else { 0 });
            }
        }
    }

    #[test]
    fn parser_skips_comments_and_rejects_p2() {
        let img = decode_pgm(b"P5\n# hi\n2 1\n255\n\x00\xff").unwrap();
        assert_eq!(img.pixels, vec![0, 255]);
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn mismatched_counts_are_rejected() {
        let s = vec![BinaryVector::zeros(4); 3];
        assert!(encode_pgm_grid(&s, GridLayout::for_samples(4, 4)).is_err());
    }
}
