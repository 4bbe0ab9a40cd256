//! Run configuration: a JSON file (all fields optional) overlaid by command-line flags.
//!
//! The schema is documented in `docs/config.md`.

use hardy_amalgam::extension::TimeGrid;
use hardy_amalgam::hardy::{default_frozen_path, FamilySpec};
use hardy_amalgam::{make_grid, Exponents, FunctionSpec, GridSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Invalid configuration, reported with the failing field.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub field: String,
    pub reason: String,
}

impl UsageError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub tmin: f64,
    pub tmax: f64,
    pub count: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            tmin: 1e-3,
            tmax: 64.0,
            count: 48,
        }
    }
}

/// Command-specific options. Each command reads the fields it understands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// `norm`: `discrete`, `ball` or `both`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    /// `norm`: expected value for `--assert`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
    /// `norm` and `cr-check`: assertion tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// `transform`: `riesz` or `multiplier`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    /// `transform`: Riesz index sequence (1-based axes), applied right to left.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    /// `transform`: `identity`, `sign`, `riesz1`, `riesz2`, or a path to a JSON sample list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    /// `extend`: `poisson` or `heat`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    /// `cr-check`: `harmonic` or `caloric`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lift: Option<String>,
    /// `cr-check`: `spectral` or `quadrature`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// `hardy`: Riesz order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// `hardy`: cone aperture of the nontangential maximal function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture: Option<f64>,
    /// `atoms`: cube side; without it the whole atom family is probed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    /// `atoms`: cube corner.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner: Option<Vec<f64>>,
    /// `report`: method names such as `maximal`, `riesz1`, `nontangential`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    /// `transform`, `extend`, `atoms`: binary dump path (`.csv` selects CSV for functions).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump: Option<PathBuf>,
}

impl Options {
    /// Fields set in `other` replace those of `self`.
    pub fn overlay(&mut self, other: Options) {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if other.$f.is_some() { self.$f = other.$f; })*
            };
        }
        take!(
            window, expect, tol, op, indices, symbol, kernel, lift, mode, order, aperture, side,
            corner, methods, dump
        );
    }
}

/// Configuration file contents. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dim: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub n: Option<usize>,
    pub exponents: Option<Vec<[f64; 2]>>,
    pub time: Option<TimeConfig>,
    pub function: Option<FunctionSpec>,
    pub family: Option<FamilySpec>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub frozen: Option<PathBuf>,
    #[serde(rename = "assert")]
    pub assert_mode: Option<bool>,
    pub options: Option<Options>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError::new("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError::new("config", e.to_string()))
    }
}

/// Fully resolved configuration, echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dim: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub exponents: Vec<[f64; 2]>,
    pub time: TimeConfig,
    pub function: FunctionSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub frozen: PathBuf,
    #[serde(rename = "assert")]
    pub assert_mode: bool,
    pub options: Options,
}

/// Designated desk-scale box for each dimension.
pub fn default_box(dim: usize) -> (f64, usize) {
    if dim == 2 {
        (8.0, 256)
    } else {
        (32.0, 4096)
    }
}

/// Band-limited function used when no function is given.
pub fn default_function(seed: u64) -> FunctionSpec {
    FunctionSpec::BandLimited {
        seed,
        low: 0.125,
        high: 0.5,
    }
}

impl RunConfig {
    /// Fills defaults and validates the grid, exponents and time grid.
    pub fn resolve(file: ConfigFile) -> Result<Self, UsageError> {
        let dim = file.dim.unwrap_or(1);
        if dim != 1 && dim != 2 {
            return Err(UsageError::new("dim", format!("must be 1 or 2, got {dim}")));
        }
        let (l0, n0) = default_box(dim);
        let seed = file.seed.unwrap_or(0);
        let cfg = RunConfig {
            dim,
            l: file.l.unwrap_or(l0),
            n: file.n.unwrap_or(n0),
            exponents: file.exponents.unwrap_or_else(|| vec![[1.0, 1.0]]),
            time: file.time.unwrap_or_default(),
            function: file.function.unwrap_or_else(|| default_function(seed)),
            family: file.family,
            seed,
            out: file.out,
            frozen: file.frozen.unwrap_or_else(default_frozen_path),
            assert_mode: file.assert_mode.unwrap_or(false),
            options: file.options.unwrap_or_default(),
        };
        cfg.grid()?;
        cfg.exponent_pairs()?;
        cfg.time_grid()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<GridSpec, UsageError> {
        make_grid(self.dim, self.l, self.n).map_err(|e| UsageError::new("grid", e.to_string()))
    }

    pub fn exponent_pairs(&self) -> Result<Vec<Exponents>, UsageError> {
        if self.exponents.is_empty() {
            return Err(UsageError::new("exponents", "need at least one (p, q) pair"));
        }
        self.exponents
            .iter()
            .map(|&[p, q]| Exponents::new(p, q).map_err(|e| UsageError::new("exponents", e.to_string())))
            .collect()
    }

    pub fn time_grid(&self) -> Result<TimeGrid, UsageError> {
        TimeGrid::log_spaced(self.time.tmin, self.time.tmax, self.time.count)
            .map_err(|e| UsageError::new("time", e.to_string()))
    }
}

/// Parses `p,q`.
pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (p, q) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `p,q`, got `{s}`"))?;
    let p: f64 = p.trim().parse().map_err(|e| format!("p in `{s}`: {e}"))?;
    let q: f64 = q.trim().parse().map_err(|e| format!("q in `{s}`: {e}"))?;
    Ok([p, q])
}

/// A function spec given inline as JSON or as `@path` to a JSON file.
pub fn parse_function(s: &str) -> Result<FunctionSpec, UsageError> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| UsageError::new("function", format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| UsageError::new("function", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_dimension() {
        let c = RunConfig::resolve(ConfigFile::default()).unwrap();
        assert_eq!((c.dim, c.l, c.n), (1, 32.0, 4096));
        let c = RunConfig::resolve(ConfigFile {
            dim: Some(2),
            ..Default::default()
        })
        .unwrap();
        assert_eq!((c.l, c.n), (8.0, 256));
    }

    #[test]
    fn invalid_fields_are_named() {
        let bad = |f: ConfigFile| RunConfig::resolve(f).unwrap_err().field;
        assert_eq!(bad(ConfigFile { dim: Some(3), ..Default::default() }), "dim");
        assert_eq!(bad(ConfigFile { n: Some(100), ..Default::default() }), "grid");
        assert_eq!(
            bad(ConfigFile { exponents: Some(vec![[0.0, 1.0]]), ..Default::default() }),
            "exponents"
        );
        assert_eq!(
            bad(ConfigFile {
                time: Some(TimeConfig { tmin: 1.0, tmax: 0.5, count: 4 }),
                ..Default::default()
            }),
            "time"
        );
    }

    #[test]
    fn config_file_parses_and_rejects_unknown_fields() {
        let text = r#"{"dim": 1, "L": 4, "n": 64, "exponents": [[1, 2]],
            "function": {"family": "indicator", "lower": [0], "upper": [2]},
            "options": {"window": "discrete"}}"#;
        let f: ConfigFile = serde_json::from_str(text).unwrap();
        let c = RunConfig::resolve(f).unwrap();
        assert_eq!(c.exponents, vec![[1.0, 2.0]]);
        assert_eq!(c.options.window.as_deref(), Some("discrete"));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"dims": 1}"#).is_err());
    }

    #[test]
    fn pair_and_overlay() {
        assert_eq!(parse_pair("1.5, 3").unwrap(), [1.5, 3.0]);
        assert!(parse_pair("1.5").is_err());
        let mut a = Options { window: Some("ball".into()), order: Some(2), ..Default::default() };
        a.overlay(Options { order: Some(1), ..Default::default() });
        assert_eq!((a.window.as_deref(), a.order), (Some("ball"), Some(1)));
    }
}
