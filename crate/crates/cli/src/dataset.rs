use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rbm_core::data::{
    bars_stripes_dataset, binarize, decode_bmat, decode_idx, encode_bmat, BarsStripesMode, BinarizeMode, BMAT_MAGIC,
};
use rbm_core::{BinaryDataset, BinaryVector};

use crate::args::LoadArgs;

const BARS_PREFIX: &str = "bars-stripes:";

/// Parses `bars-stripes:D[:distinct|weighted|sampled:N[:SEED]]`.
pub fn parse_bars_spec(spec: &str) -> Result<(usize, BarsStripesMode)> {
    let rest = spec
        .strip_prefix(BARS_PREFIX)
        .with_context(|| format!("{spec:?} is not a bars-stripes source"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    let d: usize = parts[0].parse().with_context(|| format!("bad size in {spec:?}"))?;
    let mode = match parts.get(1..).unwrap_or_default() {
        [] | ["weighted"] => BarsStripesMode::Weighted,
        ["distinct"] => BarsStripesMode::Distinct,
        ["sampled", count] => BarsStripesMode::Sampled {
            count: count.parse()?,
            seed: 0,
        },
        ["sampled", count, seed] => BarsStripesMode::Sampled {
            count: count.parse()?,
            seed: seed.parse()?,
        },
        _ => bail!("unknown bars-stripes mode in {spec:?}"),
    };
    Ok((d, mode))
}

pub fn parse_binarize(text: &str, seed: u64) -> Result<BinarizeMode> {
    match text.split_once(':') {
        None if text == "stochastic" => Ok(BinarizeMode::Stochastic { seed }),
        None if text == "threshold" => Ok(BinarizeMode::Threshold(0.5)),
        Some(("threshold", t)) => Ok(BinarizeMode::Threshold(t.parse()?)),
        _ => bail!("unknown binarization {text:?} (expected stochastic or threshold[:T])"),
    }
}

/// Reads the CSV layout written by [`BinaryDataset::to_csv`].
pub fn parse_csv(text: &str) -> Result<BinaryDataset> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().context("empty CSV")?;
    let dim = header
        .split(',')
        .count()
        .checked_sub(1)
        .context("CSV header has no columns")?;
    ensure!(header.starts_with("weight"), "CSV header must start with `weight`");
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        ensure!(
            fields.len() == dim + 1,
            "CSV row {} has {} fields, expected {}",
            n + 1,
            fields.len(),
            dim + 1
        );
        weights.push(
            fields[0]
                .parse::<u32>()
                .with_context(|| format!("bad weight on row {}", n + 1))?,
        );
        let bits = fields[1..]
            .iter()
            .map(|f| f.parse::<u8>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad bit on row {}", n + 1))?;
        rows.push(BinaryVector::new(bits)?);
    }
    Ok(BinaryDataset::with_weights(rows, dim, weights)?)
}

fn is_idx(bytes: &[u8]) -> bool {
    bytes.len() >= 4 && bytes[0] == 0 && bytes[1] == 0 && bytes[2] == 0x08
}

/// Loads a builtin or file dataset. Files are recognized by content (BMAT,
/// IDX) or by a `.csv` extension.
pub fn load_dataset(source: &str, opts: &LoadArgs) -> Result<BinaryDataset> {
    let data = if source.starts_with(BARS_PREFIX) {
        let (d, mode) = parse_bars_spec(source)?;
        bars_stripes_dataset(d, mode)?
    } else {
        let path = Path::new(source);
        let bytes = std::fs::read(path).with_context(|| format!("cannot read dataset {}", path.display()))?;
        if bytes.starts_with(BMAT_MAGIC) {
            decode_bmat(&bytes)?
        } else if is_idx(&bytes) {
            let images = decode_idx(&bytes).with_context(|| format!("cannot parse IDX file {}", path.display()))?;
            binarize(&images, parse_binarize(&opts.binarize, opts.binarize_seed)?)?
        } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            parse_csv(std::str::from_utf8(&bytes).context("CSV is not UTF-8")?)?
        } else {
            bail!(
                "{}: unrecognized dataset format (expected IDX, BMAT or .csv)",
                path.display()
            );
        }
    };
    Ok(match opts.limit {
        Some(n) => data.take(n),
        None => data,
    })
}

pub fn write_dataset(data: &BinaryDataset, out: &Path) -> Result<()> {
    let bytes = if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        data.to_csv().into_bytes()
    } else {
        encode_bmat(data)
    };
    std::fs::write(out, bytes).with_context(|| format!("cannot write {}", out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_specs() {
        assert_eq!(
            parse_bars_spec("bars-stripes:3").unwrap(),
            (3, BarsStripesMode::Weighted)
        );
        assert_eq!(
            parse_bars_spec("bars-stripes:4:distinct").unwrap(),
            (4, BarsStripesMode::Distinct)
        );
        assert_eq!(
            parse_bars_spec("bars-stripes:3:sampled:50:7").unwrap(),
            (3, BarsStripesMode::Sampled { count: 50, seed: 7 })
        );
        assert!(parse_bars_spec("bars-stripes:x").is_err());
        assert!(parse_bars_spec("bars-stripes:3:odd").is_err());
    }

    #[test]
    fn binarize_specs() {
        assert_eq!(
            parse_binarize("stochastic", 4).unwrap(),
            BinarizeMode::Stochastic { seed: 4 }
        );
        assert_eq!(
            parse_binarize("threshold:0.25", 0).unwrap(),
            BinarizeMode::Threshold(0.25)
        );
        assert_eq!(parse_binarize("threshold", 0).unwrap(), BinarizeMode::Threshold(0.5));
        assert!(parse_binarize("otsu", 0).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let data = bars_stripes_dataset(3, BarsStripesMode::Weighted).unwrap();
        assert_eq!(parse_csv(&data.to_csv()).unwrap(), data);
        assert!(parse_csv("weight,v0\n1,2\n").is_err());
        assert!(parse_csv("weight,v0\n1,1,0\n").is_err());
    }
}
