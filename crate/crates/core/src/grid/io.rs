//! Binary and CSV exchange formats for grid functions.
//!
//! Binary layout: text lines `key=value` (at least `dim`, `L`, `n`, `layout`, `dtype`),
//! a blank line, then interleaved little-endian `f64` pairs `(re, im)` in row-major order.

use super::{GridFunction, GridSpec};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const LAYOUT: &str = "row-major";
pub const DTYPE: &str = "complex-float64-little-endian";

/// Parsed text header of a binary dump.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub entries: BTreeMap<String, String>,
}

impl Header {
    pub fn for_spec(spec: &GridSpec) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert("dim".into(), spec.dim().to_string());
        entries.insert("L".into(), spec.half_extent().to_string());
        entries.insert("n".into(), spec.n().to_string());
        entries.insert("layout".into(), LAYOUT.into());
        entries.insert("dtype".into(), DTYPE.into());
        Self { entries }
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("header is missing `{key}`")))
    }

    pub fn spec(&self) -> Result<GridSpec> {
        let parse = |k: &str| -> Result<f64> {
            self.get(k)?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("header `{k}`: {e}")))
        };
        if self.get("layout")? != LAYOUT {
            return Err(Error::Format(format!("unsupported layout `{}`", self.get("layout")?)));
        }
        if self.get("dtype")? != DTYPE {
            return Err(Error::Format(format!("unsupported dtype `{}`", self.get("dtype")?)));
        }
        GridSpec::new(parse("dim")? as usize, parse("L")?, parse("n")? as usize)
    }

    fn write_to(&self, out: &mut Vec<u8>) {
        // Fixed key order keeps dumps byte-stable.
        for (k, v) in &self.entries {
            out.extend_from_slice(format!("{k}={v}\n").as_bytes());
        }
        out.push(b'\n');
    }
}

/// Splits a dump into its header and binary payload.
pub fn split_header(bytes: &[u8]) -> Result<(Header, &[u8])> {
    let mut pos = 0;
    let mut header = Header::default();
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("unterminated header".into()))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| Error::Format("header is not UTF-8".into()))?;
        pos += end + 1;
        if line.is_empty() {
            break;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("header line without `=`: {line}")))?;
        header.entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((header, &bytes[pos..]))
}

pub(crate) fn push_samples(out: &mut Vec<u8>, values: &[Complex64]) {
    out.reserve(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
}

pub(crate) fn read_samples(payload: &[u8], count: usize) -> Result<Vec<Complex64>> {
    if payload.len() != count * 16 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            count * 16,
            payload.len()
        )));
    }
    Ok(payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

/// Encodes a grid function with optional extra header entries.
pub fn encode(f: &GridFunction, extra: &[(&str, String)]) -> Vec<u8> {
    let mut header = Header::for_spec(f.spec());
    for (k, v) in extra {
        header.entries.insert((*k).to_string(), v.clone());
    }
    let mut out = Vec::new();
    header.write_to(&mut out);
    push_samples(&mut out, f.values());
    out
}

pub(crate) fn encode_many(
    spec: &GridSpec,
    extra: &[(&str, String)],
    slices: &[&[Complex64]],
) -> Vec<u8> {
    let mut header = Header::for_spec(spec);
    for (k, v) in extra {
        header.entries.insert((*k).to_string(), v.clone());
    }
    let mut out = Vec::new();
    header.write_to(&mut out);
    for s in slices {
        push_samples(&mut out, s);
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<GridFunction> {
    let (header, payload) = split_header(bytes)?;
    let spec = header.spec()?;
    GridFunction::new(spec, read_samples(payload, spec.len())?)
}

pub fn write_binary(path: &Path, f: &GridFunction) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode(f, &[]))?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<GridFunction> {
    decode(&std::fs::read(path)?)
}

/// CSV with index columns followed by `re,im`.
pub fn to_csv(f: &GridFunction) -> String {
    let spec = f.spec();
    let mut s = String::new();
    if spec.dim() == 1 {
        s.push_str("i,x,re,im\n");
    } else {
        s.push_str("i,j,x1,x2,re,im\n");
    }
    for (idx, v) in f.values().iter().enumerate() {
        let ix = spec.unflatten(idx);
        if spec.dim() == 1 {
            s.push_str(&format!("{},{},{:e},{:e}\n", ix[0], spec.node(ix[0]), v.re, v.im));
        } else {
            s.push_str(&format!(
                "{},{},{},{},{:e},{:e}\n",
                ix[0],
                ix[1],
                spec.node(ix[0]),
                spec.node(ix[1]),
                v.re,
                v.im
            ));
        }
    }
    s
}

/// Parses CSV rows of index columns then `re,im`; coordinate columns, if present, are ignored.
pub fn from_csv(text: &str, spec: GridSpec) -> Result<GridFunction> {
    let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
    let mut seen = vec![false; spec.len()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols[0].parse::<usize>().is_err() {
            continue; // header row
        }
        let need = spec.dim() + 2;
        if cols.len() < need {
            return Err(Error::Format(format!("line {}: expected {need} columns", lineno + 1)));
        }
        let num = |c: &str| -> Result<f64> {
            c.parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
        };
        let i = cols[0].parse::<usize>().unwrap();
        let j = if spec.dim() == 2 {
            cols[1]
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?
        } else {
            0
        };
        if i >= spec.n() || j >= spec.n() {
            return Err(Error::Format(format!("line {}: index out of range", lineno + 1)));
        }
        let re = num(cols[cols.len() - 2])?;
        let im = num(cols[cols.len() - 1])?;
        let idx = spec.flatten([i, j]);
        values[idx] = Complex64::new(re, im);
        seen[idx] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Format(format!("CSV has no row for flat index {missing}")));
    }
    GridFunction::new(spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn binary_round_trip() {
        let spec = make_grid(2, 2.0, 8).unwrap();
        let f = GridFunction::from_fn(spec, |x| Complex64::new(x[0], x[1] * 0.5));
        let bytes = encode(&f, &[("note", "probe".into())]);
        assert!(bytes.starts_with(b"L=2\n"));
        assert_eq!(decode(&bytes).unwrap(), f);
    }

    #[test]
    fn csv_round_trip() {
        let spec = make_grid(1, 2.0, 8).unwrap();
        let f = GridFunction::from_fn(spec, |x| Complex64::new(x[0].sin(), -x[0]));
        let g = from_csv(&to_csv(&f), spec).unwrap();
        assert!(g.max_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_truncated_payload() {
        let spec = make_grid(1, 1.0, 4).unwrap();
        let mut bytes = encode(&GridFunction::zeros(spec), &[]);
        bytes.pop();
        assert!(decode(&bytes).is_err());
    }
}
