//! Amalgam quasi-norms `(L^p, l^q)` with a unit-cube window and a unit-ball window,
//! plus the Hölder and interpolation gaps.

use crate::error::{param, Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::spectral::convolve;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A validated exponent pair `0 < p, q < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    p: f64,
    q: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > 0.0 && v.is_finite()) {
                return param(name, format!("must be positive and finite, got {v}"));
            }
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max(&self) -> f64 {
        self.p.max(self.q)
    }

    pub fn min(&self) -> f64 {
        self.p.min(self.q)
    }

    /// `p' = p / (p - 1)` when `p > 1`.
    pub fn p_conjugate(&self) -> Option<f64> {
        (self.p > 1.0).then(|| self.p / (self.p - 1.0))
    }

    pub fn q_conjugate(&self) -> Option<f64> {
        (self.q > 1.0).then(|| self.q / (self.q - 1.0))
    }

    /// The conjugate pair `(p', q')`, defined when both exponents exceed 1.
    pub fn conjugate(&self) -> Option<Exponents> {
        Some(Exponents {
            p: self.p_conjugate()?,
            q: self.q_conjugate()?,
        })
    }

    /// `(alpha p, alpha q)`.
    pub fn scaled(&self, alpha: f64) -> Result<Exponents> {
        Exponents::new(alpha * self.p, alpha * self.q)
    }

    /// `min{p, q} > (d - 1) / d`.
    pub fn above_harmonic_threshold(&self, dim: usize) -> bool {
        self.riesz_threshold_ok(dim, 1)
    }

    /// `min{p, q} > (d - 1) / (d + m - 1)`.
    pub fn riesz_threshold_ok(&self, dim: usize, order: usize) -> bool {
        let d = dim as f64;
        self.min() > (d - 1.0) / (d + order as f64 - 1.0)
    }

    /// `min{p, q} > p0`.
    pub fn above(&self, p0: f64) -> bool {
        self.min() > p0
    }

    /// Label used in frozen-constant keys and reports, e.g. `1.2,0.9`.
    pub fn label(&self) -> String {
        format!("{},{}", self.p, self.q)
    }
}

/// Local averaging window of the amalgam norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Unit cubes `k + [0, 1)^d` on the integer lattice.
    Discrete,
    /// Balls `B(y, 1)` centred at every node.
    Ball,
}

/// `(sum_k (int_{Q_k} |f|^p)^{q/p})^{1/q}` or its ball-window analogue.
pub fn amalgam_norm(f: &GridFunction, e: Exponents, window: Window) -> Result<f64> {
    match window {
        Window::Discrete => Ok(discrete_norm(f.spec(), &f.abs(), e)),
        Window::Ball => ball_norm(f, e),
    }
}

/// Local `L^p` masses `int_{Q_k} |f|^p` of the unit cubes, row-major over cube indices.
pub fn cube_masses(spec: &GridSpec, abs: &[f64], p: f64) -> Vec<f64> {
    let c = spec.cells_per_unit();
    let cubes = 2 * spec.half_extent();
    let hd = spec.cell_volume();
    let n = spec.n();
    if spec.dim() == 1 {
        (0..cubes)
            .map(|k| abs[k * c..(k + 1) * c].iter().map(|v| v.powf(p)).sum::<f64>() * hd)
            .collect()
    } else {
        let mut out = vec![0.0; cubes * cubes];
        for i in 0..n {
            let row = &abs[i * n..(i + 1) * n];
            let base = (i / c) * cubes;
            for (k, chunk) in row.chunks_exact(c).enumerate() {
                out[base + k] += chunk.iter().map(|v| v.powf(p)).sum::<f64>();
            }
        }
        out.iter_mut().for_each(|v| *v *= hd);
        out
    }
}

pub(crate) fn discrete_norm(spec: &GridSpec, abs: &[f64], e: Exponents) -> f64 {
    let r = e.q / e.p;
    let s: f64 = cube_masses(spec, abs, e.p).iter().map(|m| m.powf(r)).sum();
    s.powf(1.0 / e.q)
}

/// Weights of the closed unit ball around the origin node: exact node membership in d=1
/// (half weight on the boundary nodes), cell-coverage fractions in d=2 rescaled to `pi`.
pub fn unit_ball_weights(spec: &GridSpec) -> GridFunction {
    let h = spec.h();
    if spec.dim() == 1 {
        GridFunction::from_real_fn(*spec, |x| {
            let j = (x[0] / h).round().abs();
            let jmax = (1.0 / h).round();
            if j < jmax {
                1.0
            } else if j == jmax {
                0.5
            } else {
                0.0
            }
        })
    } else {
        const SUB: usize = 16;
        let raw = GridFunction::from_real_fn(*spec, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r > 1.0 + h {
                return 0.0;
            }
            if r + h * std::f64::consts::SQRT_2 < 1.0 {
                return 1.0;
            }
            let mut hits = 0usize;
            for a in 0..SUB {
                for b in 0..SUB {
                    let u = x[0] + h * ((a as f64 + 0.5) / SUB as f64 - 0.5);
                    let v = x[1] + h * ((b as f64 + 0.5) / SUB as f64 - 0.5);
                    if u * u + v * v < 1.0 {
                        hits += 1;
                    }
                }
            }
            hits as f64 / (SUB * SUB) as f64
        });
        let mass = raw.integral().re;
        raw.scale_real(std::f64::consts::PI / mass)
    }
}

fn ball_norm(f: &GridFunction, e: Exponents) -> Result<f64> {
    let spec = *f.spec();
    let local = f.map(|v| Complex64::new(v.norm().powf(e.p), 0.0));
    let w = unit_ball_weights(&spec);
    let conv = convolve(&local, &w)?;
    let r = e.q / e.p;
    let s: f64 = conv.values().iter().map(|v| v.re.max(0.0).powf(r)).sum();
    Ok((s * spec.cell_volume()).powf(1.0 / e.q))
}

/// Both sides of an inequality and their difference `rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `|int f conj(g)|` against `|f|_{p,q} |g|_{p',q'}` (discrete window).
pub fn holder_gap(f: &GridFunction, g: &GridFunction, e: Exponents) -> Result<Gap> {
    f.spec().ensure_same(g.spec())?;
    let conj = e
        .conjugate()
        .ok_or_else(|| Error::Parameter {
            name: "exponents",
            reason: format!("Hölder needs p, q > 1, got ({}, {})", e.p, e.q),
        })?;
    let pairing: Complex64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * f.spec().cell_volume();
    let lhs = pairing.norm();
    let rhs = amalgam_norm(f, e, Window::Discrete)? * amalgam_norm(g, conj, Window::Discrete)?;
    Ok(Gap {
        lhs,
        rhs,
        gap: rhs - lhs,
    })
}

/// `|g|_{alpha p, alpha q}` against `|g|_inf^{1 - 1/alpha} |g|_{p,q}^{1/alpha}` (discrete window).
pub fn interpolation_gap(g: &GridFunction, e: Exponents, alpha: f64) -> Result<Gap> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return param("alpha", format!("must be >= 1, got {alpha}"));
    }
    let sup = g.max_abs();
    if sup == 0.0 {
        return param("g", "identically zero input");
    }
    let lhs = amalgam_norm(g, e.scaled(alpha)?, Window::Discrete)?;
    let base = amalgam_norm(g, e, Window::Discrete)?;
    let rhs = if alpha == 1.0 {
        base
    } else {
        sup.powf(1.0 - 1.0 / alpha) * base.powf(1.0 / alpha)
    };
    Ok(Gap {
        lhs,
        rhs,
        gap: rhs - lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, FunctionSpec};

    fn indicator(spec: GridSpec, a: f64, b: f64) -> GridFunction {
        sample(&FunctionSpec::Indicator { lower: vec![a], upper: vec![b] }, spec).unwrap()
    }

    #[test]
    fn single_and_double_cube() {
        let spec = make_grid(1, 32.0, 1024).unwrap();
        let one = indicator(spec, 0.0, 1.0);
        for (p, q) in [(0.5, 3.0), (1.0, 1.0), (2.0, 0.7)] {
            let v = amalgam_norm(&one, Exponents::new(p, q).unwrap(), Window::Discrete).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        let two = indicator(spec, 0.0, 2.0);
        let v = amalgam_norm(&two, Exponents::new(1.0, 2.0).unwrap(), Window::Discrete).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn two_cube_norm_decreases_in_q() {
        let spec = make_grid(1, 8.0, 128).unwrap();
        let two = indicator(spec, 0.0, 2.0);
        let mut prev = f64::INFINITY;
        for q in [0.5, 1.0, 1.5, 2.0, 4.0] {
            let v = amalgam_norm(&two, Exponents::new(1.0, q).unwrap(), Window::Discrete).unwrap();
            assert!((v - 2f64.powf(1.0 / q)).abs() < 1e-13);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn ball_window_indicator() {
        let spec = make_grid(1, 32.0, 1024).unwrap();
        let one = indicator(spec, 0.0, 1.0);
        let v = amalgam_norm(&one, Exponents::new(2.0, 2.0).unwrap(), Window::Ball).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn ball_weights_have_ball_volume() {
        let s1 = make_grid(1, 4.0, 64).unwrap();
        assert!((unit_ball_weights(&s1).integral().re - 2.0).abs() < 1e-14);
        let s2 = make_grid(2, 4.0, 64).unwrap();
        assert!((unit_ball_weights(&s2).integral().re - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn holder_examples() {
        let spec = make_grid(1, 8.0, 128).unwrap();
        let e = Exponents::new(2.0, 2.0).unwrap();
        let a = indicator(spec, 0.0, 1.0);
        let b = indicator(spec, 1.0, 2.0);
        let same = holder_gap(&a, &a, e).unwrap();
        assert!((same.lhs - 1.0).abs() < 1e-14 && (same.rhs - 1.0).abs() < 1e-14);
        let disjoint = holder_gap(&a, &b, e).unwrap();
        assert_eq!(disjoint.lhs, 0.0);
        assert!((disjoint.gap - 1.0).abs() < 1e-14);
        assert!(holder_gap(&a, &b, Exponents::new(1.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let spec = make_grid(1, 8.0, 128).unwrap();
        let e = Exponents::new(1.0, 1.0).unwrap();
        let a = indicator(spec, 0.0, 1.0);
        let g = interpolation_gap(&a, e, 2.0).unwrap();
        assert!((g.lhs - 1.0).abs() < 1e-14 && g.gap.abs() < 1e-14);
        let gauss = sample(&FunctionSpec::Gaussian { center: vec![], width: 1.0 }, spec).unwrap();
        assert_eq!(interpolation_gap(&gauss, e, 1.0).unwrap().gap, 0.0);
        assert!(interpolation_gap(&gauss, e, 2.0).unwrap().gap >= 0.0);
        assert!(interpolation_gap(&GridFunction::zeros(spec), e, 2.0).is_err());
        assert!(interpolation_gap(&gauss, e, 0.5).is_err());
    }

    #[test]
    fn thresholds() {
        let e = Exponents::new(0.6, 0.9).unwrap();
        assert!(e.above_harmonic_threshold(1));
        assert!(e.above_harmonic_threshold(2));
        assert!(!Exponents::new(0.4, 2.0).unwrap().above_harmonic_threshold(2));
        assert!(Exponents::new(0.4, 2.0).unwrap().riesz_threshold_ok(2, 2));
        assert!(e.above(0.55) && !e.above(0.75));
        assert_eq!(Exponents::new(2.0, 3.0).unwrap().conjugate().unwrap().q(), 1.5);
        assert!(Exponents::new(0.0, 1.0).is_err());
    }
}
