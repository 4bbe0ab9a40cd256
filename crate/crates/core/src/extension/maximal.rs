//! Radial, nontangential and Hardy-Littlewood maximal functions and the area integral.

use super::balls::{ball_max, ball_sum, Ball};
use super::{ExtensionStack, TimeGrid};
use crate::error::{param, Result};
use crate::grid::{GridFunction, GridSpec, Spectrum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Profile `phi` of the radial maximal function `sup_t |f * phi_t|`, `phi_t = t^{-d} phi(./t)`.
#[derive(Clone)]
pub enum Mollifier {
    /// `phi = W_1`, so `phi_t^(xi) = e^{-4 pi^2 t^2 |xi|^2}`.
    Heat,
    /// `phi = P_1`, so `phi_t^(xi) = e^{-2 pi t |xi|}`.
    Poisson,
    /// Any integrable profile with nonzero integral, sampled after dilation.
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Mollifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mollifier::Heat => write!(f, "Heat"),
            Mollifier::Poisson => write!(f, "Poisson"),
            Mollifier::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Mollifier {
    /// `phi^(t xi)` for the built-in profiles.
    fn dilated_symbol(&self, xi: [f64; 2], t: f64) -> f64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        match self {
            Mollifier::Heat => (-4.0 * PI * PI * t * t * r2).exp(),
            Mollifier::Poisson => (-2.0 * PI * t * r2.sqrt()).exp(),
            Mollifier::Custom(_) => unreachable!("custom profiles are sampled"),
        }
    }

    fn dilated_samples(&self, spec: GridSpec, t: f64) -> GridFunction {
        let Mollifier::Custom(phi) = self else {
            unreachable!()
        };
        let scale = t.powi(-(spec.dim() as i32));
        GridFunction::from_real_fn(spec, |x| {
            let y: Vec<f64> = x.iter().map(|v| v / t).collect();
            scale * phi(&y)
        })
    }

    fn check_mean(&self, spec: GridSpec) -> Result<()> {
        if let Mollifier::Custom(_) = self {
            let s = self.dilated_samples(spec, 1.0);
            let mass = s.integral().norm();
            let total: f64 = s.abs().iter().sum::<f64>() * spec.cell_volume();
            if !(mass > 1e-12 * total) || total == 0.0 {
                return param("phi", "mollifier must have nonzero integral");
            }
        }
        Ok(())
    }
}

/// `M_phi f(x) = max_{t in tg} |f * phi_t|(x)`.
pub fn radial_maximal(f: &GridFunction, phi: &Mollifier, tg: &TimeGrid) -> Result<GridFunction> {
    let spec = *f.spec();
    phi.check_mean(spec)?;
    let spectrum = Spectrum::of(f);
    let pointwise = |t: f64| -> Vec<f64> {
        match phi {
            Mollifier::Custom(_) => {
                let k = Spectrum::of(&phi.dilated_samples(spec, t));
                spectrum.convolve_with(&k).abs()
            }
            _ => spectrum
                .apply(|xi| Complex64::new(phi.dilated_symbol(xi, t), 0.0))
                .abs(),
        }
    };
    let out = tg
        .values()
        .par_iter()
        .map(|&t| pointwise(t))
        .reduce(|| vec![0.0; spec.len()], max_merge);
    GridFunction::from_real(spec, &out)
}

fn max_merge(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.max(y);
    }
    a
}

/// `u*(x) = max over slices t and nodes |y - x| < aperture t of |u(y, t)|`.
///
/// Cones wrap around the periodic box; once a cone covers the box the slice
/// contributes its global maximum.
pub fn nontangential_max(stack: &ExtensionStack, aperture: f64) -> Result<GridFunction> {
    if !(aperture > 0.0 && aperture.is_finite()) {
        return param("aperture", format!("must be positive, got {aperture}"));
    }
    let spec = *stack.spec();
    let out = stack
        .slices()
        .par_iter()
        .zip(stack.times().values().par_iter())
        .map(|(u, &t)| ball_max(&spec, &u.abs(), &Ball::open(&spec, aperture * t)))
        .reduce(|| vec![0.0; spec.len()], max_merge);
    GridFunction::from_real(spec, &out)
}

/// Dyadic radii `h, 2h, 4h, ...` up to `L`.
pub fn dyadic_radii(spec: &GridSpec) -> Vec<f64> {
    let mut r = spec.h();
    let mut out = Vec::new();
    while r <= spec.l() * (1.0 + 1e-12) {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// `M_r f(x) = max_rho (avg_{B(x, rho)} |f|^r)^{1/r}` over dyadic radii, averages over nodes.
pub fn hl_maximal(f: &GridFunction, r: f64) -> Result<GridFunction> {
    if !(r > 0.0 && r.is_finite()) {
        return param("r", format!("must be positive, got {r}"));
    }
    let spec = *f.spec();
    let powered: Vec<f64> = f.abs().iter().map(|v| v.powf(r)).collect();
    let out = dyadic_radii(&spec)
        .par_iter()
        .map(|&rho| {
            let ball = Ball::open(&spec, rho);
            let count = ball.count(&spec) as f64;
            ball_sum(&spec, &powered, &ball)
                .into_iter()
                .map(|s| (s.max(0.0) / count).powf(1.0 / r))
                .collect::<Vec<f64>>()
        })
        .reduce(|| vec![0.0; spec.len()], max_merge);
    GridFunction::from_real(spec, &out)
}

/// Frequency window of the area integral, applied as `phi(t xi)`.
#[derive(Clone)]
pub enum SpectralWindow {
    /// Smooth radial bump equal to 1 on `2 <= |xi| <= 4` and vanishing outside `1 < |xi| < 8`.
    AnnularBump,
    Custom(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl fmt::Debug for SpectralWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralWindow::AnnularBump => write!(f, "AnnularBump"),
            SpectralWindow::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// `C^inf` step rising from 0 at `s <= 0` to 1 at `s >= 1`.
fn smooth_step(s: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = psi(s);
    let b = psi(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// The built-in annular bump as a function of `|xi|`.
pub fn annular_bump(r: f64) -> f64 {
    if r <= 1.0 || r >= 8.0 {
        0.0
    } else if r < 2.0 {
        smooth_step(r - 1.0)
    } else if r <= 4.0 {
        1.0
    } else {
        smooth_step((8.0 - r) / 4.0)
    }
}

impl SpectralWindow {
    pub fn eval(&self, xi: [f64; 2]) -> f64 {
        match self {
            SpectralWindow::AnnularBump => annular_bump((xi[0] * xi[0] + xi[1] * xi[1]).sqrt()),
            SpectralWindow::Custom(w) => w(xi),
        }
    }
}

/// Discrete cone integral
/// `(sum_t w_t / t^{d+1} sum_{|y-x|<t} |(phi(t .) f^)^v(y)|^2 h^d)^{1/2}`.
pub fn area_integral(
    f: &GridFunction,
    window: &SpectralWindow,
    tg: &TimeGrid,
) -> Result<GridFunction> {
    let spec = *f.spec();
    let d = spec.dim() as i32;
    let hd = spec.cell_volume();
    let weights = tg.trapezoid_weights();
    let spectrum = Spectrum::of(f);
    let per_slice: Vec<Vec<f64>> = tg
        .values()
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&t, &w)| {
            let v = spectrum.apply(|xi| Complex64::new(window.eval([t * xi[0], t * xi[1]]), 0.0));
            let energy: Vec<f64> = v.values().iter().map(|c| c.norm_sqr()).collect();
            let sums = ball_sum(&spec, &energy, &Ball::open(&spec, t));
            let factor = w * hd / t.powi(d + 1);
            sums.into_iter().map(|s| s * factor).collect::<Vec<f64>>()
        })
        .collect();
    // Summed in time order so the result does not depend on scheduling.
    let mut out = vec![0.0; spec.len()];
    for slice in per_slice {
        for (x, y) in out.iter_mut().zip(slice) {
            *x += y;
        }
    }
    GridFunction::from_real(spec, &out.iter().map(|v| v.max(0.0).sqrt()).collect::<Vec<_>>())
}
