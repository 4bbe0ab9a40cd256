//! Slow reference implementations for cross-checks. Nothing here touches the FFT layer.

use crate::error::{param, Error, Result};
use crate::extension::{SpectralWindow, TimeGrid};
use crate::grid::GridFunction;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest number of samples the quadratic-time oracles accept.
pub const ORACLE_CAP: usize = 1 << 14;

fn check_cap(f: &GridFunction) -> Result<()> {
    if f.len() > ORACLE_CAP {
        return param(
            "size",
            format!("{} samples exceed the oracle cap of {ORACLE_CAP}", f.len()),
        );
    }
    Ok(())
}

/// `(f * g)(x_i) = h^d sum_k f(x_k) g(x_i - x_k)` with periodic wrap.
pub fn convolve_direct(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.spec().ensure_same(g.spec())?;
    check_cap(f)?;
    let spec = *f.spec();
    let n = spec.n();
    let half = n / 2;
    // Node index holding x_i - x_k on one axis.
    let diff = |i: usize, k: usize| (i + n + half - k) % n;
    let hd = spec.cell_volume();
    let out: Vec<Complex64> = (0..spec.len())
        .map(|i| {
            let ix = spec.unflatten(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..spec.len() {
                let kx = spec.unflatten(k);
                let j = if spec.dim() == 1 {
                    diff(ix[0], kx[0])
                } else {
                    spec.flatten([diff(ix[0], kx[0]), diff(ix[1], kx[1])])
                };
                acc += f.get(k) * g.get(j);
            }
            acc * hd
        })
        .collect();
    GridFunction::new(spec, out)
}

/// Principal-value Hilbert transform (the d=1 Riesz transform) by direct quadrature
/// against the periodized kernel `(1/2L) cot(pi u / 2L)`:
///
/// `R f(x) = int_0^L (f(x-u) - f(x+u)) K(u) du`, with the panel `[0, delta]` integrated by
/// the trapezoid rule using the limit `-2 f'(x) / pi` at `u = 0`, and nodes beyond `delta`
/// by the trapezoid rule on the grid. `delta` must be a whole number of cells.
pub fn riesz_direct_pv(f: &GridFunction, j: usize, delta: f64) -> Result<GridFunction> {
    check_cap(f)?;
    let spec = *f.spec();
    if spec.dim() != 1 {
        return Err(Error::Unsupported(
            "the principal-value oracle is implemented for d=1 only".into(),
        ));
    }
    if j != 1 {
        return param("axis", format!("axis {j} outside 1..=1"));
    }
    let h = spec.h();
    let n = spec.n();
    let cells = delta / h;
    if !(cells >= 1.0 && (cells - cells.round()).abs() < 1e-9 && (cells.round() as usize) < n / 2) {
        return param("delta", format!("must be a positive whole number of cells below L, got {delta}"));
    }
    let m = cells.round() as usize;
    let period = 2.0 * spec.l();
    let kernel = |u: f64| (PI * u / period).tan().recip() / period;
    let at = |i: i64| f.get(i.rem_euclid(n as i64) as usize);
    let out: Vec<Complex64> = (0..n as i64)
        .map(|i| {
            let g = |s: usize| (at(i - s as i64) - at(i + s as i64)) * kernel(s as f64 * h);
            let slope = (-at(i + 2) + at(i + 1) * 8.0 - at(i - 1) * 8.0 + at(i - 2)) / (12.0 * h);
            let g0 = slope * (-2.0 / PI);
            let near = (g0 + g(m)) * (delta / 2.0);
            let mut far = g(m) * 0.5;
            for s in m + 1..n / 2 {
                far += g(s);
            }
            near + far * h
        })
        .collect();
    GridFunction::new(spec, out)
}

/// Closed-form time profiles for [`weyl_direct`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum ClosedProfile {
    /// `g(s) = e^{-lambda s}`.
    ExpDecay { lambda: f64 },
    /// `g(s) = W_s(x0)` in dimension `dim`, `|x0| = radius`.
    HeatPeak { radius: f64, dim: usize },
}

impl ClosedProfile {
    fn derivative(&self, s: f64) -> f64 {
        match *self {
            ClosedProfile::ExpDecay { lambda } => -lambda * (-lambda * s).exp(),
            ClosedProfile::HeatPeak { radius, dim } => {
                let d = dim as f64;
                let w = (4.0 * PI * s).powf(-d / 2.0) * (-radius * radius / (4.0 * s)).exp();
                w * (radius * radius / (4.0 * s * s) - d / (2.0 * s))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ClosedProfile::ExpDecay { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                param("lambda", format!("must be positive, got {lambda}"))
            }
            ClosedProfile::HeatPeak { dim, .. } if dim == 0 || dim > 2 => Err(Error::Unsupported(
                format!("heat profiles are provided for d = 1, 2, got {dim}"),
            )),
            ClosedProfile::HeatPeak { radius, .. } if !radius.is_finite() => {
                param("radius", "must be finite")
            }
            _ => Ok(()),
        }
    }
}

/// `(i / sqrt(pi)) int_t^inf g'(s) (s - t)^{-1/2} ds` by the exp-sinh rule
/// `s - t = exp(pi/2 sinh tau)`, halving the step until successive levels agree.
pub fn weyl_direct(g: &ClosedProfile, t: f64) -> Result<Complex64> {
    g.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return param("t", format!("must be positive, got {t}"));
    }
    const TAU: f64 = 5.0;
    let term = |tau: f64| {
        let x = (PI / 2.0 * tau.sinh()).exp();
        let dx = PI / 2.0 * tau.cosh() * x;
        g.derivative(t + x) * dx / x.sqrt()
    };
    let mut step = 0.5;
    let mut sum: f64 = {
        let k = (TAU / step) as i64;
        (-k..=k).map(|i| term(i as f64 * step)).sum()
    };
    let mut prev = sum * step;
    for _ in 0..12 {
        // Add the midpoints of the current level.
        let k = (TAU / step) as i64;
        let mids: f64 = (-k..k).map(|i| term((i as f64 + 0.5) * step)).sum();
        sum += mids;
        step /= 2.0;
        let cur = sum * step;
        if (cur - prev).abs() <= 1e-14 * cur.abs().max(1e-300) {
            prev = cur;
            break;
        }
        prev = cur;
    }
    Ok(Complex64::new(0.0, prev / PI.sqrt()))
}

/// Separable direct DFT along every axis; `sign = -1` forward, `+1` backward (unscaled).
fn direct_dft(values: &[Complex64], n: usize, dim: usize, sign: f64) -> Vec<Complex64> {
    let twiddle: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    let line = |input: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                input
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * twiddle[(j * k) % n])
                    .sum()
            })
            .collect()
    };
    if dim == 1 {
        return line(values);
    }
    let mut rows: Vec<Complex64> = Vec::with_capacity(n * n);
    for r in 0..n {
        rows.extend(line(&values[r * n..(r + 1) * n]));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for c in 0..n {
        let col: Vec<Complex64> = (0..n).map(|r| rows[r * n + c]).collect();
        for (r, v) in line(&col).into_iter().enumerate() {
            out[r * n + c] = v;
        }
    }
    out
}

/// Area integral by direct DFTs and brute-force cone sums; same discretization as
/// [`crate::extension::area_integral`].
pub fn area_integral_direct(
    f: &GridFunction,
    window: &SpectralWindow,
    tg: &TimeGrid,
) -> Result<GridFunction> {
    check_cap(f)?;
    let spec = *f.spec();
    let n = spec.n();
    let d = spec.dim();
    let h = spec.h();
    let hd = spec.cell_volume();
    let raw = direct_dft(f.values(), n, d, -1.0);
    let weights = tg.trapezoid_weights();
    let signed = |a: usize, b: usize| -> i64 {
        let k = (a as i64 - b as i64).rem_euclid(n as i64);
        if k >= n as i64 / 2 {
            k - n as i64
        } else {
            k
        }
    };
    let mut total = vec![0.0; spec.len()];
    for (&t, &w) in tg.values().iter().zip(&weights) {
        let filtered: Vec<Complex64> = raw
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let xi = spec.frequency_vector(i);
                c * window.eval([t * xi[0], t * xi[1]])
            })
            .collect();
        let back = direct_dft(&filtered, n, d, 1.0);
        let energy: Vec<f64> = back
            .iter()
            .map(|v| (v / spec.len() as f64).norm_sqr())
            .collect();
        let r2 = (t / h) * (t / h);
        let factor = w * hd / t.powi(d as i32 + 1);
        for (x, out) in total.iter_mut().enumerate() {
            let ix = spec.unflatten(x);
            let mut acc = 0.0;
            for (y, e) in energy.iter().enumerate() {
                let iy = spec.unflatten(y);
                let mut dist2 = 0i64;
                for a in 0..d {
                    let k = signed(iy[a], ix[a]);
                    dist2 += k * k;
                }
                if (dist2 as f64) < r2 {
                    acc += e;
                }
            }
            *out += acc * factor;
        }
    }
    GridFunction::from_real(spec, &total.iter().map(|v| v.sqrt()).collect::<Vec<_>>())
}
