//! Named function families sampled at grid nodes.

use super::{from_transform, io, GridFunction, GridSpec};
use crate::error::{param, Error, Result};
use crate::hardy::{make_atom, AtomSpec};
use crate::kernels;
use crate::amalgam::Exponents;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A function family with its parameters. Vector parameters of length 1 are broadcast
/// to every axis; empty vectors mean the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `exp(-|x - c|^2 / w^2)`.
    Gaussian {
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
    },
    /// Difference of Gaussians with zero integral: `g_w - 2^{-d/2} g_{sqrt(2) w}`.
    MeanFreeGaussian {
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
    },
    /// Indicator of the half-open box `[lower, upper)`.
    Indicator { lower: Vec<f64>, upper: Vec<f64> },
    /// Poisson kernel `P_t`; `periodic` selects its periodization over the box.
    PoissonKernel {
        t: f64,
        #[serde(default)]
        periodic: bool,
    },
    /// Conjugate Poisson kernel `Q_t^j` (axis `j` is 1-based).
    ConjugatePoisson {
        t: f64,
        #[serde(default = "default_axis")]
        axis: usize,
        #[serde(default)]
        periodic: bool,
    },
    /// Heat kernel `W_t`.
    HeatKernel { t: f64 },
    /// Moment-cancelling atom on the cube `corner + [0, side)^d`.
    Atom {
        #[serde(default)]
        corner: Vec<f64>,
        side: f64,
        #[serde(default)]
        order: usize,
        #[serde(default = "one")]
        p: f64,
        #[serde(default = "one")]
        q: f64,
    },
    /// Real random function with spectrum on `low <= |xi| <= high` (cycles per unit), unit L2 norm.
    BandLimited { seed: u64, low: f64, high: f64 },
    /// Binary dump (or `.csv`) on the same grid.
    FromFile { path: String },
}

fn default_axis() -> usize {
    1
}

fn one() -> f64 {
    1.0
}

fn broadcast(v: &[f64], d: usize, name: &'static str) -> Result<[f64; 2]> {
    match v.len() {
        0 => Ok([0.0; 2]),
        1 => Ok([v[0], v[0]]),
        k if k == d => Ok([v[0], if d == 2 { v[1] } else { 0.0 }]),
        k => param(name, format!("expected 1 or {d} entries, got {k}")),
    }
}

fn positive_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return param("t", format!("kernel time must be positive, got {t}"));
    }
    Ok(())
}

/// Samples `family` at the nodes of `spec`.
pub fn sample(family: &FunctionSpec, spec: GridSpec) -> Result<GridFunction> {
    let d = spec.dim();
    match family {
        FunctionSpec::Gaussian { center, width } => {
            let c = broadcast(center, d, "center")?;
            if !(*width > 0.0) {
                return param("width", "must be positive");
            }
            Ok(gaussian(spec, c, *width))
        }
        FunctionSpec::MeanFreeGaussian { center, width } => {
            let c = broadcast(center, d, "center")?;
            if !(*width > 0.0) {
                return param("width", "must be positive");
            }
            let a = gaussian(spec, c, *width);
            let b = gaussian(spec, c, width * std::f64::consts::SQRT_2);
            a.combine(
                Complex64::new(1.0, 0.0),
                &b,
                Complex64::new(-(0.5f64).powf(d as f64 / 2.0), 0.0),
            )
        }
        FunctionSpec::Indicator { lower, upper } => {
            let lo = broadcast(lower, d, "lower")?;
            let hi = broadcast(upper, d, "upper")?;
            Ok(GridFunction::from_real_fn(spec, |x| {
                let inside = x.iter().enumerate().all(|(a, &v)| v >= lo[a] && v < hi[a]);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }))
        }
        FunctionSpec::PoissonKernel { t, periodic } => {
            positive_time(*t)?;
            if *periodic {
                kernels::make_periodic_kernel(kernels::KernelKind::Poisson, Some(*t), spec)
            } else {
                kernels::make_kernel(kernels::KernelKind::Poisson, Some(*t), spec)
            }
        }
        FunctionSpec::ConjugatePoisson { t, axis, periodic } => {
            positive_time(*t)?;
            let kind = kernels::KernelKind::ConjugatePoisson(*axis);
            if *periodic {
                kernels::make_periodic_kernel(kind, Some(*t), spec)
            } else {
                kernels::make_kernel(kind, Some(*t), spec)
            }
        }
        FunctionSpec::HeatKernel { t } => {
            positive_time(*t)?;
            kernels::make_kernel(kernels::KernelKind::Heat, Some(*t), spec)
        }
        FunctionSpec::Atom {
            corner,
            side,
            order,
            p,
            q,
        } => {
            let c = broadcast(corner, d, "corner")?;
            let atom = AtomSpec {
                corner: c[..d].to_vec(),
                side: *side,
                order: *order,
                exponents: Exponents::new(*p, *q)?,
            };
            make_atom(&atom, spec)
        }
        FunctionSpec::BandLimited { seed, low, high } => band_limited(spec, *seed, *low, *high),
        FunctionSpec::FromFile { path } => load(Path::new(path), spec),
    }
}

fn gaussian(spec: GridSpec, c: [f64; 2], w: f64) -> GridFunction {
    GridFunction::from_real_fn(spec, |x| {
        let r2: f64 = x.iter().enumerate().map(|(a, &v)| (v - c[a]).powi(2)).sum();
        (-r2 / (w * w)).exp()
    })
}

fn band_limited(spec: GridSpec, seed: u64, low: f64, high: f64) -> Result<GridFunction> {
    if !(low >= 0.0 && high > low) {
        return param("band", format!("need 0 <= low < high, got [{low}, {high}]"));
    }
    if high >= spec.nyquist() {
        return param(
            "band",
            format!("upper edge {high} must stay below the Nyquist frequency {}", spec.nyquist()),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..spec.len())
        .map(|i| {
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            let xi = spec.frequency_vector(i);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            if r >= low && r <= high && r > 0.0 {
                Complex64::new(a - 0.5, b - 0.5)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let n = spec.n();
    let mirror = |i: usize| -> usize {
        let ix = spec.unflatten(i);
        let m0 = (n - ix[0]) % n;
        let m1 = if spec.dim() == 2 { (n - ix[1]) % n } else { 0 };
        spec.flatten([m0, m1])
    };
    let f = from_transform(spec, |xi| {
        // Hermitian symmetrization gives a real function.
        let k0 = (xi[0] * 2.0 * spec.l()).round() as i64;
        let k1 = (xi[1] * 2.0 * spec.l()).round() as i64;
        let i = spec.flatten([k0.rem_euclid(n as i64) as usize, k1.rem_euclid(n as i64) as usize]);
        (raw[i] + raw[mirror(i)].conj()) * 0.5
    })
    .to_real();
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::Numerical(format!(
            "band [{low}, {high}] contains no sampled frequency on {}",
            spec.grid_id()
        )));
    }
    Ok(f.remove_mean().scale_real(1.0 / norm))
}

fn load(path: &Path, spec: GridSpec) -> Result<GridFunction> {
    let f = if path.extension().is_some_and(|e| e == "csv") {
        io::from_csv(&std::fs::read_to_string(path)?, spec)?
    } else {
        io::read_binary(path)?
    };
    f.spec().ensure_same(&spec)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_values() {
        let spec = make_grid(1, 8.0, 64).unwrap();
        let f = sample(&FunctionSpec::Gaussian { center: vec![0.0], width: 1.0 }, spec).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let x = spec.node(i);
            assert!((v.re - (-x * x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_point_values() {
        let spec = make_grid(1, 32.0, 1024).unwrap();
        let o = spec.origin_index();
        let p = sample(&FunctionSpec::PoissonKernel { t: 1.0, periodic: false }, spec).unwrap();
        assert!((p.get(o).re - 1.0 / PI).abs() < 1e-15);
        let w = sample(&FunctionSpec::HeatKernel { t: 1.0 }, spec).unwrap();
        assert!((w.get(o).re - 0.282_094_791_773_878_1).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_time() {
        let spec = make_grid(1, 4.0, 32).unwrap();
        assert!(sample(&FunctionSpec::HeatKernel { t: 0.0 }, spec).is_err());
        assert!(sample(&FunctionSpec::PoissonKernel { t: -1.0, periodic: false }, spec).is_err());
    }

    #[test]
    fn band_limited_is_real_mean_free_and_in_band() {
        let spec = make_grid(2, 4.0, 32).unwrap();
        let f = sample(&FunctionSpec::BandLimited { seed: 3, low: 0.25, high: 1.0 }, spec).unwrap();
        assert!(f.max_imag() == 0.0);
        assert!(f.mean().norm() < 1e-15);
        assert!((f.l2_norm() - 1.0).abs() < 1e-12);
        let s = crate::grid::forward_transform(&f);
        for (i, c) in s.coeffs().iter().enumerate() {
            let xi = spec.frequency_vector(i);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            if r < 0.25 || r > 1.0 {
                assert!(c.norm() < 1e-13, "leak at {xi:?}");
            }
        }
        let again = sample(&FunctionSpec::BandLimited { seed: 3, low: 0.25, high: 1.0 }, spec).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn mean_free_gaussian_has_zero_integral() {
        for spec in [make_grid(1, 16.0, 512).unwrap(), make_grid(2, 8.0, 128).unwrap()] {
            let f = sample(&FunctionSpec::MeanFreeGaussian { center: vec![0.5], width: 1.0 }, spec)
                .unwrap();
            assert!(f.integral().norm() < 1e-12, "{:e}", f.integral().norm());
        }
    }

    #[test]
    fn json_tags() {
        let s: FunctionSpec = serde_json::from_str(r#"{"family":"gaussian","center":[0],"width":1}"#).unwrap();
        assert_eq!(s, FunctionSpec::Gaussian { center: vec![0.0], width: 1.0 });
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"family":"nope"}"#).is_err());
    }
}
