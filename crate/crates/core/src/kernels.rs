//! Closed-form kernel bank: Poisson `P_t`, conjugate Poisson `Q_t^j`, heat `W_t`,
//! caloric conjugates `S_j(., t)`, and the Riesz kernel `K_j` split at `|x| = 1`.
//!
//! Axes are numbered from 1. Transforms follow `F(xi) = int f(x) e^{-2 pi i x.xi} dx`, so
//! `P_t^ = e^{-2 pi t |xi|}`, `W_t^ = e^{-4 pi^2 t |xi|^2}` and conjugates carry `-i xi_j / |xi|`.

use crate::error::{param, Error, Result};
use crate::grid::{from_transform, GridFunction, GridSpec};
use crate::quad::gauss_legendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Poisson,
    ConjugatePoisson(usize),
    Heat,
    CaloricConjugate(usize),
    RieszNear(usize),
    RieszFar(usize),
}

impl KernelKind {
    fn axis(&self) -> Option<usize> {
        match *self {
            KernelKind::ConjugatePoisson(j)
            | KernelKind::CaloricConjugate(j)
            | KernelKind::RieszNear(j)
            | KernelKind::RieszFar(j) => Some(j),
            _ => None,
        }
    }

    fn needs_time(&self) -> bool {
        !matches!(self, KernelKind::RieszNear(_) | KernelKind::RieszFar(_))
    }
}

pub(crate) fn check_axis(j: usize, dim: usize) -> Result<()> {
    if j == 0 || j > dim {
        return param("axis", format!("axis {j} outside 1..={dim}"));
    }
    Ok(())
}

/// `Gamma((d+1)/2) / pi^{(d+1)/2}`.
pub fn poisson_constant(dim: usize) -> f64 {
    match dim {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => unreachable!("dimension checked by GridSpec"),
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `P_t(x)`.
pub fn poisson(x: &[f64], t: f64) -> f64 {
    let d = x.len();
    poisson_constant(d) * t / (t * t + norm2(x)).powf((d as f64 + 1.0) / 2.0)
}

/// `Q_t^j(x)`.
pub fn conjugate_poisson(x: &[f64], t: f64, j: usize) -> f64 {
    let d = x.len();
    poisson_constant(d) * x[j - 1] / (t * t + norm2(x)).powf((d as f64 + 1.0) / 2.0)
}

/// `W_t(x) = (4 pi t)^{-d/2} e^{-|x|^2 / 4t}`.
pub fn heat(x: &[f64], t: f64) -> f64 {
    heat_radial(norm2(x).sqrt(), t, x.len())
}

pub fn heat_radial(r: f64, t: f64, dim: usize) -> f64 {
    (4.0 * PI * t).powf(-(dim as f64) / 2.0) * (-r * r / (4.0 * t)).exp()
}

/// `d/dt W_t` at radius `r`.
pub fn heat_dt_radial(r: f64, t: f64, dim: usize) -> f64 {
    heat_radial(r, t, dim) * (r * r / (4.0 * t * t) - dim as f64 / (2.0 * t))
}

/// `K_j(x)`, zero at the origin.
pub fn riesz_kernel(x: &[f64], j: usize) -> f64 {
    let d = x.len();
    let r2 = norm2(x);
    if r2 == 0.0 {
        return 0.0;
    }
    poisson_constant(d) * x[j - 1] / r2.powf((d as f64 + 1.0) / 2.0)
}

fn validate(kind: KernelKind, t: Option<f64>, spec: &GridSpec) -> Result<f64> {
    if let Some(j) = kind.axis() {
        check_axis(j, spec.dim())?;
    }
    if kind.needs_time() {
        match t {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => param("t", format!("must be positive, got {t}")),
            None => param("t", "required for this kernel"),
        }
    } else {
        Ok(0.0)
    }
}

/// Caloric conjugate symbol `-i xi_j / |xi| e^{-4 pi^2 t |xi|^2}` (0 at the origin).
pub fn caloric_conjugate_symbol(xi: [f64; 2], t: f64, j: usize) -> Complex64 {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = r2.sqrt();
    Complex64::new(0.0, -xi[j - 1] / r) * (-4.0 * PI * PI * t * r2).exp()
}

/// Samples of the free-space kernels at the grid nodes.
///
/// `CaloricConjugate` has no elementary closed form and is built from its symbol.
pub fn make_kernel(kind: KernelKind, t: Option<f64>, spec: GridSpec) -> Result<GridFunction> {
    let t = validate(kind, t, &spec)?;
    Ok(match kind {
        KernelKind::Poisson => GridFunction::from_real_fn(spec, |x| poisson(x, t)),
        KernelKind::ConjugatePoisson(j) => {
            GridFunction::from_real_fn(spec, |x| conjugate_poisson(x, t, j))
        }
        KernelKind::Heat => GridFunction::from_real_fn(spec, |x| heat(x, t)),
        KernelKind::CaloricConjugate(j) => {
            from_transform(spec, |xi| caloric_conjugate_symbol(xi, t, j)).to_real()
        }
        KernelKind::RieszNear(j) => GridFunction::from_real_fn(spec, |x| {
            if norm2(x) < 1.0 {
                riesz_kernel(x, j)
            } else {
                0.0
            }
        }),
        KernelKind::RieszFar(j) => GridFunction::from_real_fn(spec, |x| {
            if norm2(x) >= 1.0 {
                riesz_kernel(x, j)
            } else {
                0.0
            }
        }),
    })
}

/// Periodizations over the box `[-L, L)^d` of the time-dependent kernels.
///
/// In d=1 the Poisson pair has the closed forms
/// `P = sinh(a) / (T (cosh a - cos b))`, `Q = sin b / (T (cosh a - cos b))` with
/// `T = 2L`, `a = 2 pi t / T`, `b = 2 pi x / T`; everything else is summed from the symbol.
pub fn make_periodic_kernel(kind: KernelKind, t: Option<f64>, spec: GridSpec) -> Result<GridFunction> {
    let t = validate(kind, t, &spec)?;
    let period = 2.0 * spec.l();
    let two_pi = 2.0 * PI;
    match kind {
        KernelKind::Poisson if spec.dim() == 1 => {
            let a = two_pi * t / period;
            Ok(GridFunction::from_real_fn(spec, |x| {
                let b = two_pi * x[0] / period;
                // cosh a - cos b written without cancellation for small a, b.
                let den = 2.0 * ((a / 2.0).sinh().powi(2) + (b / 2.0).sin().powi(2));
                a.sinh() / (period * den)
            }))
        }
        KernelKind::ConjugatePoisson(_) if spec.dim() == 1 => {
            let a = two_pi * t / period;
            Ok(GridFunction::from_real_fn(spec, |x| {
                let b = two_pi * x[0] / period;
                let den = 2.0 * ((a / 2.0).sinh().powi(2) + (b / 2.0).sin().powi(2));
                b.sin() / (period * den)
            }))
        }
        KernelKind::Poisson => Ok(from_transform(spec, |xi| {
            Complex64::new((-two_pi * t * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()).exp(), 0.0)
        })
        .to_real()),
        KernelKind::ConjugatePoisson(j) => Ok(from_transform(spec, |xi| {
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -xi[j - 1] / r) * (-two_pi * t * r).exp()
            }
        })
        .to_real()),
        KernelKind::Heat => Ok(from_transform(spec, |xi| {
            Complex64::new((-4.0 * PI * PI * t * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0)
        })
        .to_real()),
        KernelKind::CaloricConjugate(_) => make_kernel(kind, Some(t), spec),
        KernelKind::RieszNear(_) | KernelKind::RieszFar(_) => Err(Error::Unsupported(
            "periodized Riesz kernels are not provided; use the spectral Riesz transform".into(),
        )),
    }
}

/// `K_j = near + far` with `near = K_j 1_{B(0,1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszSplit {
    pub near: GridFunction,
    pub far: GridFunction,
}

pub fn riesz_kernel_split(j: usize, spec: GridSpec) -> Result<RieszSplit> {
    Ok(RieszSplit {
        near: make_kernel(KernelKind::RieszNear(j), None, spec)?,
        far: make_kernel(KernelKind::RieszFar(j), None, spec)?,
    })
}

/// Derivative kernels whose decay is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// `d/dt W_t`, scaled by `max{t^{1+d/2}, |x|^{d+2}}`.
    HeatDt,
    /// `d^{1/2}/dt^{1/2} W_t`, scaled by `max{t^{(d+1)/2}, |x|^{d+1}}`.
    HeatHalfDt,
}

/// Observed constant of a decay bound over a radius/time lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub max_ratio: f64,
    pub at_radius: f64,
    pub at_time: f64,
}

/// Weyl half-derivative in time of the heat kernel at radius `r`:
/// `(2i / sqrt(pi)) int_0^inf dW_{t+u^2}(r)/ds du`, with `u = sigma tan(theta)`.
pub fn heat_half_dt_radial(r: f64, t: f64, dim: usize) -> Complex64 {
    const PANELS: usize = 48;
    const POINTS: usize = 10;
    let sigma = (t + r * r / (2.0 * dim as f64 + 4.0)).sqrt();
    let (x, w) = gauss_legendre(POINTS);
    let half_pi = PI / 2.0;
    let step = half_pi / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let mid = (p as f64 + 0.5) * step;
        for (xi, wi) in x.iter().zip(&w) {
            let theta = mid + 0.5 * step * xi;
            let c = theta.cos();
            let u = sigma * theta.tan();
            let du = sigma / (c * c);
            total += wi * 0.5 * step * heat_dt_radial(r, t + u * u, dim) * du;
        }
    }
    Complex64::new(0.0, 2.0 / PI.sqrt() * total)
}

/// Maximum of `|kernel| * scale` over radii `k h` covering the box and the given times.
pub fn decay_certificate(kind: DecayKind, spec: &GridSpec, times: &[f64]) -> Result<DecayCertificate> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return param("times", "need a nonempty list of positive times");
    }
    let d = spec.dim();
    let h = spec.h();
    let rmax = spec.l() * (d as f64).sqrt();
    let count = (rmax / h).ceil() as usize;
    let mut best = DecayCertificate {
        max_ratio: 0.0,
        at_radius: 0.0,
        at_time: times[0],
    };
    use rayon::prelude::*;
    let per_time: Vec<DecayCertificate> = times
        .par_iter()
        .map(|&t| {
            let mut local = DecayCertificate {
                max_ratio: 0.0,
                at_radius: 0.0,
                at_time: t,
            };
            for k in 0..=count {
                let r = k as f64 * h;
                let (val, scale) = match kind {
                    DecayKind::HeatDt => (
                        heat_dt_radial(r, t, d).abs(),
                        t.powf(1.0 + d as f64 / 2.0).max(r.powi(d as i32 + 2)),
                    ),
                    DecayKind::HeatHalfDt => (
                        heat_half_dt_radial(r, t, d).norm(),
                        t.powf((d as f64 + 1.0) / 2.0).max(r.powi(d as i32 + 1)),
                    ),
                };
                let ratio = val * scale;
                if ratio > local.max_ratio {
                    local.max_ratio = ratio;
                    local.at_radius = r;
                }
            }
            local
        })
        .collect();
    for c in per_time {
        if c.max_ratio > best.max_ratio {
            best = c;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn point_values() {
        let s1 = make_grid(1, 32.0, 1024).unwrap();
        let p = make_kernel(KernelKind::Poisson, Some(1.0), s1).unwrap();
        assert!((p.get(s1.origin_index()).re - 1.0 / PI).abs() < 1e-15);
        let q = make_kernel(KernelKind::ConjugatePoisson(1), Some(1.0), s1).unwrap();
        assert!((q.get(s1.origin_index() + 16).re - 0.5 / PI).abs() < 1e-15);
        let s2 = make_grid(2, 8.0, 128).unwrap();
        let w = make_kernel(KernelKind::Heat, Some(1.0), s2).unwrap();
        let o = s2.flatten([64, 64]);
        assert!((w.get(o).re - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn riesz_split_examples() {
        let spec = make_grid(1, 32.0, 1024).unwrap();
        let s = riesz_kernel_split(1, spec).unwrap();
        let at2 = spec.origin_index() + 32;
        assert!((s.far.get(at2).re - 0.5 / PI).abs() < 1e-15);
        assert_eq!(s.near.get(at2).re, 0.0);
        assert_eq!(s.near.get(spec.origin_index()).re, 0.0);
        let bound = 1.0 / PI;
        assert!(s.far.max_abs() <= bound + 1e-15);
    }

    #[test]
    fn odd_kernels_are_odd() {
        for spec in [make_grid(1, 8.0, 128).unwrap(), make_grid(2, 4.0, 32).unwrap()] {
            let n = spec.n();
            for kind in [
                KernelKind::ConjugatePoisson(1),
                KernelKind::CaloricConjugate(1),
                KernelKind::RieszNear(1),
                KernelKind::RieszFar(1),
            ] {
                let t = Some(0.7);
                let k = make_kernel(kind, t, spec).unwrap();
                for idx in 0..spec.len() {
                    let ix = spec.unflatten(idx);
                    if ix[0] == 0 || (spec.dim() == 2 && ix[1] == 0) {
                        continue;
                    }
                    let m = [n - ix[0], if spec.dim() == 2 { n - ix[1] } else { 0 }];
                    assert!((k.at(ix) + k.at(m)).norm() <= 1e-12, "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn periodic_kernels_have_unit_mass() {
        let s1 = make_grid(1, 32.0, 4096).unwrap();
        for t in [0.1, 1.0, 8.0, 64.0] {
            let p = make_periodic_kernel(KernelKind::Poisson, Some(t), s1).unwrap();
            assert!((p.integral().re - 1.0).abs() < 1e-6, "t={t}");
        }
        let s2 = make_grid(2, 8.0, 256).unwrap();
        for kind in [KernelKind::Poisson, KernelKind::Heat] {
            let p = make_periodic_kernel(kind, Some(1.0), s2).unwrap();
            assert!((p.integral().re - 1.0).abs() < 1e-10);
        }
        let w = make_kernel(KernelKind::Heat, Some(4.0), s1).unwrap();
        assert!((w.integral().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn periodic_closed_form_matches_symbol_sum() {
        let spec = make_grid(1, 8.0, 512).unwrap();
        for kind in [KernelKind::Poisson, KernelKind::ConjugatePoisson(1)] {
            let closed = make_periodic_kernel(kind, Some(0.5), spec).unwrap();
            let symbol = if kind == KernelKind::Poisson {
                from_transform(spec, |xi| Complex64::new((-PI * xi[0].abs()).exp(), 0.0))
            } else {
                from_transform(spec, |xi| {
                    let sign = if xi[0] == 0.0 { 0.0 } else { xi[0].signum() };
                    Complex64::new(0.0, -sign) * (-PI * xi[0].abs()).exp()
                })
            };
            let diff = closed.max_diff(&symbol).unwrap();
            assert!(diff < 1e-12, "{kind:?}: {diff:e}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let spec = make_grid(1, 4.0, 32).unwrap();
        assert!(make_kernel(KernelKind::Heat, Some(0.0), spec).is_err());
        assert!(make_kernel(KernelKind::Heat, None, spec).is_err());
        assert!(make_kernel(KernelKind::ConjugatePoisson(2), Some(1.0), spec).is_err());
        assert!(make_kernel(KernelKind::RieszNear(1), None, spec).is_ok());
    }

    #[test]
    fn heat_dt_scaling_at_origin() {
        for t in [0.1, 1.0, 10.0] {
            let v = heat_dt_radial(0.0, t, 1).abs() * t.powf(1.5);
            assert!((v - 2.0 / (8.0 * PI.sqrt())).abs() < 1e-14);
        }
    }

    #[test]
    fn heat_half_dt_at_origin() {
        for t in [1e-3, 0.3, 5.0] {
            let v1 = heat_half_dt_radial(0.0, t, 1);
            assert!((v1 - Complex64::new(0.0, -1.0 / (2.0 * PI * t))).norm() < 1e-10 / t);
            let v2 = heat_half_dt_radial(0.0, t, 2);
            let e2 = -1.0 / (8.0 * PI.sqrt() * t.powf(1.5));
            assert!((v2.im - e2).abs() < 1e-10 * e2.abs());
        }
    }
}
