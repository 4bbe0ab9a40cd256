//! Weyl half-derivative in time,
//! `d^{1/2} g(t) = (e^{i pi/2} / sqrt(pi)) int_t^inf g'(s) (s - t)^{-1/2} ds`,
//! by quadrature on sampled profiles and spectrally on heat stacks, plus the full time derivative.
//!
//! On a heat stack the spectral route multiplies each slice by `-2 pi i |xi|`: this is what the
//! defining integral gives for `e^{-4 pi^2 t |xi|^2}` (`g = e^{-lambda t}` maps to `-i sqrt(lambda) g`).

use crate::error::{param, Error, Result};
use crate::extension::{ExtensionStack, KernelTag, TimeGrid};
use crate::grid::{map_spectrum, GridFunction};
use crate::quad::gauss_legendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Continuation of a profile beyond its last sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// The profile is assumed negligible past `t_max`; checked against `tail_tol`.
    None,
    /// `g(s) = g(t_max) e^{-lambda (s - t_max)}` for `s > t_max`.
    ExpDecay(f64),
}

/// Sampled trace `t -> u(x0, t)` of a stack at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    times: Vec<f64>,
    values: Vec<Complex64>,
    tail: Tail,
}

impl TimeProfile {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, tail: Tail) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Mismatch(format!(
                "{} times for {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 4 {
            return param("profile", "need at least 4 samples for the spline");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return param("profile", "times must be strictly increasing");
        }
        if let Tail::ExpDecay(l) = tail {
            if !(l > 0.0 && l.is_finite()) {
                return param("tail", format!("decay rate must be positive, got {l}"));
            }
        }
        Ok(Self {
            times,
            values,
            tail,
        })
    }

    /// Samples a closed-form profile on a time grid.
    pub fn from_fn(tg: &TimeGrid, g: impl Fn(f64) -> Complex64, tail: Tail) -> Result<Self> {
        let times = tg.values().to_vec();
        let values = times.iter().map(|&t| g(t)).collect();
        Self::new(times, values, tail)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }
}

/// Tolerances of the quadrature route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylOptions {
    /// Largest admissible `|g(t_max)| / max|g|` when no tail is supplied.
    pub tail_tol: f64,
}

impl Default for WeylOptions {
    fn default() -> Self {
        Self { tail_tol: 1e-6 }
    }
}

/// A quadrature value with the size of the neglected (or modelled) tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfDerivative {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `e^{x^2} erfc(x)` for `x >= 0`.
pub fn erfcx(x: f64) -> f64 {
    if x < 1.0 {
        // erf by its Maclaurin series; erfc(x) >= 0.15 here so the subtraction is benign.
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for k in 1..60 {
            term *= -x2 / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        x2.exp() * (1.0 - 2.0 / PI.sqrt() * sum)
    } else {
        // Laplace continued fraction x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), evaluated backward.
        let mut tail = x;
        for k in (1..=400).rev() {
            tail = x + 0.5 * k as f64 / tail;
        }
        1.0 / (tail * PI.sqrt())
    }
}

/// Not-a-knot cubic spline slopes `g'(t_i)`.
fn spline_slopes(t: &[f64], g: &[Complex64]) -> Vec<Complex64> {
    let m = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<Complex64> = (0..m - 1).map(|i| (g[i + 1] - g[i]) / h[i]).collect();
    let mut sub = vec![0.0; m];
    let mut dia = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    dia[0] = h[1];
    sup[0] = h[0] + h[1];
    rhs[0] = ((h[0] + 2.0 * (h[0] + h[1])) * h[1] * del[0] + h[0] * h[0] * del[1]) / (h[0] + h[1]);
    for i in 1..m - 1 {
        sub[i] = h[i];
        dia[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i - 1];
        rhs[i] = (del[i - 1] * h[i] + del[i] * h[i - 1]) * 3.0;
    }
    let (a, b) = (h[m - 3], h[m - 2]);
    sub[m - 1] = a + b;
    dia[m - 1] = a;
    rhs[m - 1] = (b * b * del[m - 3] + (2.0 * (a + b) + b) * a * del[m - 2]) / (a + b);
    thomas(&sub, &dia, &sup, &rhs)
}

fn thomas(sub: &[f64], dia: &[f64], sup: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let m = dia.len();
    let mut c = vec![0.0; m];
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    c[0] = sup[0] / dia[0];
    d[0] = rhs[0] / dia[0];
    for i in 1..m {
        let den = dia[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < m { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - d[i - 1] * sub[i]) / den;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - x[i + 1] * c[i];
    }
    x
}

/// Derivative of the Hermite cubic on `[t_i, t_i + h]` at local coordinate `tau`.
fn hermite_slope(g0: Complex64, g1: Complex64, s0: Complex64, s1: Complex64, h: f64, tau: f64) -> Complex64 {
    (g0 - g1) * ((6.0 * tau * tau - 6.0 * tau) / h)
        + s0 * (3.0 * tau * tau - 4.0 * tau + 1.0)
        + s1 * (3.0 * tau * tau - 2.0 * tau)
}

/// `(i / sqrt(pi)) int_t^inf g'(s) (s - t)^{-1/2} ds` for the spline of `prof`.
///
/// With `s = t + u^2` the integrand `2 g'(t + u^2)` is a quartic in `u` on every knot
/// interval, so a 3-point Gauss-Legendre rule per interval integrates the spline exactly.
pub fn half_derivative_quadrature(prof: &TimeProfile, t: f64, opts: &WeylOptions) -> Result<HalfDerivative> {
    let times = &prof.times;
    let m = times.len();
    let t_max = times[m - 1];
    if !(t >= times[0] && t < t_max) {
        return param("t", format!("evaluation point {t} outside [{}, {t_max})", times[0]));
    }
    let slopes = spline_slopes(times, &prof.values);
    Ok(integrate_spline(prof, &slopes, t, opts)?)
}

fn integrate_spline(
    prof: &TimeProfile,
    slopes: &[Complex64],
    t: f64,
    opts: &WeylOptions,
) -> Result<HalfDerivative> {
    let times = &prof.times;
    let g = &prof.values;
    let m = times.len();
    let t_max = times[m - 1];
    let (x, w) = gauss_legendre(3);
    let start = times.partition_point(|&s| s <= t).saturating_sub(1);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in start..m - 1 {
        let (a, b) = (times[i].max(t), times[i + 1]);
        if b <= a {
            continue;
        }
        let h = times[i + 1] - times[i];
        let (ua, ub) = ((a - t).sqrt(), (b - t).sqrt());
        let half = 0.5 * (ub - ua);
        let mid = 0.5 * (ub + ua);
        for (xk, wk) in x.iter().zip(&w) {
            let u = mid + half * xk;
            let tau = (t + u * u - times[i]) / h;
            acc += hermite_slope(g[i], g[i + 1], slopes[i], slopes[i + 1], h, tau) * (wk * half);
        }
    }
    // (i / sqrt(pi)) * 2 * int g'(t + u^2) du
    let mut value = Complex64::new(0.0, 2.0 / PI.sqrt()) * acc;
    let g_end = g[m - 1];
    let tail_bound = match prof.tail {
        Tail::ExpDecay(lambda) => {
            let a = t_max - t;
            // int_{t_max}^inf -lambda g_end e^{-lambda (s - t_max)} (s - t)^{-1/2} ds
            let tail = -g_end * lambda.sqrt() * erfcx((lambda * a).sqrt()) * PI.sqrt();
            value += Complex64::new(0.0, 1.0 / PI.sqrt()) * tail;
            0.0
        }
        Tail::None => {
            let peak = g.iter().fold(0.0f64, |p, v| p.max(v.norm()));
            if g_end.norm() > opts.tail_tol * peak {
                return Err(Error::Numerical(format!(
                    "profile has not decayed: |g(t_max)| = {:e} exceeds {:e} of its peak; supply a tail",
                    g_end.norm(),
                    opts.tail_tol
                )));
            }
            // A monotone remainder of size |g(t_max)| contributes at most this much.
            g_end.norm() / (PI * (t_max - t)).sqrt()
        }
    };
    Ok(HalfDerivative { value, tail_bound })
}

/// The quadrature route as a linear map on profiles sampled on one time grid,
/// evaluated at every grid time except the last (whose value is the tail term alone).
#[derive(Debug, Clone)]
pub struct WeylOperator {
    times: Vec<f64>,
    tail: Tail,
    /// Row-major `len x len` complex weights.
    matrix: Vec<Complex64>,
}

impl WeylOperator {
    pub fn new(tg: &TimeGrid, tail: Tail) -> Result<Self> {
        let times = tg.values().to_vec();
        let m = times.len();
        if m < 4 {
            return param("times", "need at least 4 times");
        }
        let loose = WeylOptions { tail_tol: f64::INFINITY };
        let columns: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![Complex64::new(0.0, 0.0); m];
                e[j] = Complex64::new(1.0, 0.0);
                let prof = TimeProfile::new(times.clone(), e, tail)?;
                let slopes = spline_slopes(&prof.times, &prof.values);
                (0..m)
                    .map(|k| {
                        if k + 1 == m {
                            Ok(Self::last_row_entry(&prof, tail))
                        } else {
                            Ok(integrate_spline(&prof, &slopes, times[k], &loose)?.value)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut matrix = vec![Complex64::new(0.0, 0.0); m * m];
        for (j, col) in columns.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                matrix[k * m + j] = *v;
            }
        }
        Ok(Self { times, tail, matrix })
    }

    fn last_row_entry(prof: &TimeProfile, tail: Tail) -> Complex64 {
        let m = prof.times.len();
        match tail {
            Tail::ExpDecay(lambda) => {
                // At t = t_max only the tail remains: -i sqrt(lambda) g(t_max).
                Complex64::new(0.0, -lambda.sqrt()) * prof.values[m - 1]
            }
            Tail::None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Half-derivative of the profile at every grid time.
    pub fn apply(&self, values: &[Complex64], opts: &WeylOptions) -> Result<Vec<Complex64>> {
        let m = self.times.len();
        if values.len() != m {
            return Err(Error::Mismatch(format!("{} values for {m} times", values.len())));
        }
        if self.tail == Tail::None {
            let peak = values.iter().fold(0.0f64, |p, v| p.max(v.norm()));
            if values[m - 1].norm() > opts.tail_tol * peak {
                return Err(Error::Numerical(format!(
                    "profile has not decayed: |g(t_max)| / peak = {:e} > {:e}",
                    values[m - 1].norm() / peak,
                    opts.tail_tol
                )));
            }
        }
        Ok((0..m)
            .map(|k| {
                self.matrix[k * m..(k + 1) * m]
                    .iter()
                    .zip(values)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }
}

/// Quadrature half-derivative of every node profile of a stack.
pub fn half_derivative_stack_quadrature(
    stack: &ExtensionStack,
    tail: Tail,
    opts: &WeylOptions,
) -> Result<ExtensionStack> {
    let op = WeylOperator::new(stack.times(), tail)?;
    let spec = *stack.spec();
    let m = stack.len();
    let profiles: Vec<Vec<Complex64>> = (0..spec.len())
        .into_par_iter()
        .map(|idx| op.apply(&stack.profile_at(idx), opts))
        .collect::<Result<Vec<_>>>()?;
    let slices = (0..m)
        .map(|k| GridFunction::new(spec, profiles.iter().map(|p| p[k]).collect()))
        .collect::<Result<Vec<_>>>()?;
    ExtensionStack::new(stack.times().clone(), slices, KernelTag::Custom)
}

/// Spectral half-derivative of a heat stack: every slice times `-2 pi i |xi|`.
pub fn half_derivative_spectral(stack: &ExtensionStack) -> Result<ExtensionStack> {
    if stack.kernel() != KernelTag::Heat {
        return Err(Error::Unsupported(format!(
            "spectral half-derivative needs a heat stack, got {}",
            stack.kernel().name()
        )));
    }
    stack.map_slices(|s, _| {
        Ok(map_spectrum(s, |xi| {
            Complex64::new(0.0, -2.0 * PI * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt())
        }))
    })
}

/// `d/dt` of a stack: exact symbols on heat (`-4 pi^2 |xi|^2`) and Poisson (`-2 pi |xi|`)
/// stacks, second-order differences on the (nonuniform) time grid otherwise.
pub fn time_derivative(stack: &ExtensionStack) -> Result<ExtensionStack> {
    if stack.len() < 3 {
        return param("stack", "time derivative needs at least 3 slices");
    }
    match stack.kernel() {
        KernelTag::Heat => stack.map_slices(|s, _| {
            Ok(map_spectrum(s, |xi| {
                Complex64::new(-4.0 * PI * PI * (xi[0] * xi[0] + xi[1] * xi[1]), 0.0)
            }))
        }),
        KernelTag::Poisson => stack.map_slices(|s, _| {
            Ok(map_spectrum(s, |xi| {
                Complex64::new(-2.0 * PI * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt(), 0.0)
            }))
        }),
        KernelTag::Custom => finite_difference_dt(stack),
    }
}

/// Three-point nonuniform differences in `t` (one-sided at the ends).
pub fn finite_difference_dt(stack: &ExtensionStack) -> Result<ExtensionStack> {
    let t = stack.times().values();
    let m = t.len();
    if m < 3 {
        return param("stack", "time derivative needs at least 3 slices");
    }
    let weights = |k: usize| -> ([usize; 3], [f64; 3]) {
        let (i0, i1, i2) = if k == 0 {
            (0, 1, 2)
        } else if k + 1 == m {
            (m - 3, m - 2, m - 1)
        } else {
            (k - 1, k, k + 1)
        };
        let (a, b, c) = (t[i0], t[i1], t[i2]);
        let x = t[k];
        // Derivative of the Lagrange interpolant through (a, b, c) at x.
        let wa = ((x - b) + (x - c)) / ((a - b) * (a - c));
        let wb = ((x - a) + (x - c)) / ((b - a) * (b - c));
        let wc = ((x - a) + (x - b)) / ((c - a) * (c - b));
        ([i0, i1, i2], [wa, wb, wc])
    };
    let slices = (0..m)
        .map(|k| {
            let (idx, w) = weights(k);
            let a = stack.slice(idx[0]).combine(Complex64::new(w[0], 0.0), stack.slice(idx[1]), Complex64::new(w[1], 0.0))?;
            a.combine(Complex64::new(1.0, 0.0), stack.slice(idx[2]), Complex64::new(w[2], 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    ExtensionStack::new(stack.times().clone(), slices, KernelTag::Custom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(t_min: f64, t_max: f64, count: usize) -> TimeGrid {
        TimeGrid::log_spaced(t_min, t_max, count).unwrap()
    }

    #[test]
    fn exponential_profile() {
        for lambda in [1.0, 4.0] {
            let tg = dense(1e-3, 12.0, 800);
            let prof = TimeProfile::from_fn(
                &tg,
                |t| Complex64::new((-lambda * t).exp(), 0.0),
                Tail::ExpDecay(lambda),
            )
            .unwrap();
            for t in [0.01, 0.5, 1.0, 3.0] {
                let v = half_derivative_quadrature(&prof, t, &WeylOptions::default()).unwrap();
                let exact = Complex64::new(0.0, -lambda.sqrt() * (-lambda * t).exp());
                assert!((v.value - exact).norm() <= 1e-4 * exact.norm(), "lambda={lambda} t={t}");
            }
        }
    }

    #[test]
    fn constant_profile_has_zero_half_derivative() {
        let tg = dense(0.01, 10.0, 20);
        let prof = TimeProfile::from_fn(&tg, |_| Complex64::new(2.0, -1.0), Tail::ExpDecay(1.0)).unwrap();
        let v = half_derivative_quadrature(&prof, 1.0, &WeylOptions::default()).unwrap();
        // Only the modelled tail contributes.
        let tail = Complex64::new(0.0, -1.0) * Complex64::new(2.0, -1.0) * erfcx(9f64.sqrt());
        assert!((v.value - tail).norm() < 1e-12);
    }

    #[test]
    fn linearity() {
        let tg = dense(0.01, 40.0, 60);
        let a = TimeProfile::from_fn(&tg, |t| Complex64::new((-t).exp(), 0.0), Tail::None).unwrap();
        let b = TimeProfile::from_fn(&tg, |t| Complex64::new(0.0, (-2.0 * t).exp() * t), Tail::None).unwrap();
        let (ca, cb) = (Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.5));
        let c = TimeProfile::new(
            tg.values().to_vec(),
            a.values().iter().zip(b.values()).map(|(x, y)| ca * x + cb * y).collect(),
            Tail::None,
        )
        .unwrap();
        let opts = WeylOptions::default();
        let t = 0.7;
        let va = half_derivative_quadrature(&a, t, &opts).unwrap().value;
        let vb = half_derivative_quadrature(&b, t, &opts).unwrap().value;
        let vc = half_derivative_quadrature(&c, t, &opts).unwrap().value;
        assert!((vc - (ca * va + cb * vb)).norm() < 1e-10);
    }

    #[test]
    fn undecayed_profile_without_tail_is_rejected() {
        let tg = dense(0.01, 1.0, 10);
        let prof = TimeProfile::from_fn(&tg, |t| Complex64::new((-t).exp(), 0.0), Tail::None).unwrap();
        assert!(half_derivative_quadrature(&prof, 0.1, &WeylOptions::default()).is_err());
        let ok = half_derivative_quadrature(&prof, 0.1, &WeylOptions { tail_tol: 1.0 }).unwrap();
        assert!(ok.tail_bound > 0.0);
    }

    #[test]
    fn operator_matches_pointwise_route() {
        let tg = dense(1e-3, 8.0, 40);
        let prof = TimeProfile::from_fn(&tg, |t| Complex64::new((-2.0 * t).exp(), t.sin() * (-t).exp()), Tail::ExpDecay(1.0)).unwrap();
        let op = WeylOperator::new(&tg, Tail::ExpDecay(1.0)).unwrap();
        let all = op.apply(prof.values(), &WeylOptions::default()).unwrap();
        for k in [0, 5, 20, 38] {
            let v = half_derivative_quadrature(&prof, tg.values()[k], &WeylOptions::default()).unwrap();
            assert!((all[k] - v.value).norm() < 1e-12);
        }
    }

    #[test]
    fn spline_reproduces_cubics() {
        let t: Vec<f64> = vec![0.1, 0.3, 0.35, 0.9, 1.4, 2.0];
        let g: Vec<Complex64> = t.iter().map(|&s| Complex64::new(s * s * s - s, 2.0 * s * s)).collect();
        let slopes = spline_slopes(&t, &g);
        for (s, &x) in slopes.iter().zip(&t) {
            let exact = Complex64::new(3.0 * x * x - 1.0, 4.0 * x);
            assert!((s - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn erfcx_continuity() {
        let below = erfcx(1.0 - 1e-15);
        let above = erfcx(1.0 + 1e-15);
        assert!((below - above).abs() < 1e-13 * below, "{below} {above}");
        // Reference values exp(x^2) erfc(x) from 30-digit arithmetic.
        for (x, exact) in [
            (0.5, 0.6156903441929259),
            (1.0, 0.42758357615580705),
            (2.0, 0.2553956763105057),
            (6.0, 0.09277656780053836),
        ] {
            assert!((erfcx(x) - exact).abs() < 1e-14 * exact, "{x}: {}", erfcx(x));
        }
        // Large-argument asymptote 1/(x sqrt(pi)) (1 - 1/(2x^2)).
        let x = 1e4;
        let asym = (1.0 - 0.5 / (x * x)) / (x * PI.sqrt());
        assert!((erfcx(x) - asym).abs() < 1e-15 * asym);
        assert_eq!(erfcx(0.0), 1.0);
    }
}
