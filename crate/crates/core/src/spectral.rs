//! Fourier multiplier engine: homogeneous symbols `theta(xi/|xi|)`, Riesz transforms and
//! their fused compositions, periodic convolution and the rank-2 check for multiplier families.

use crate::error::{param, Error, Result};
use crate::grid::{map_spectrum, GridFunction, Spectrum};
use crate::kernels::check_axis;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A symbol on the unit sphere `S^{d-1}` with a separate value at `xi = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereSymbol {
    /// d=1: values at `+1` and `-1`.
    Line {
        plus: Complex64,
        minus: Complex64,
        dc: Complex64,
    },
    /// d=2: `sum_k c_k e^{i k phi}` in the angle `phi` of `xi`.
    Trig {
        coeffs: Vec<(i64, Complex64)>,
        dc: Complex64,
    },
    /// d=2: uniform angle samples `phi_m = 2 pi m / M` with a periodic cubic spline.
    Sampled { spline: PeriodicSpline, dc: Complex64 },
}

impl SphereSymbol {
    pub fn line(plus: Complex64, minus: Complex64) -> Self {
        SphereSymbol::Line { plus, minus, dc: ZERO }
    }

    /// Constant symbol `theta = c` (with default value 0 at the origin).
    pub fn constant(dim: usize, c: Complex64) -> Self {
        if dim == 1 {
            Self::line(c, c)
        } else {
            SphereSymbol::Trig { coeffs: vec![(0, c)], dc: ZERO }
        }
    }

    /// `theta(z) = sign(z)` in d=1.
    pub fn sign() -> Self {
        Self::line(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    /// `theta(z) = -i z_j`, the Riesz symbol.
    pub fn riesz(dim: usize, j: usize) -> Self {
        if dim == 1 {
            Self::line(Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0))
        } else if j == 1 {
            // -i cos(phi) = -i/2 (e^{i phi} + e^{-i phi})
            SphereSymbol::Trig {
                coeffs: vec![(1, Complex64::new(0.0, -0.5)), (-1, Complex64::new(0.0, -0.5))],
                dc: ZERO,
            }
        } else {
            // -i sin(phi) = -1/2 e^{i phi} + 1/2 e^{-i phi}
            SphereSymbol::Trig {
                coeffs: vec![(1, Complex64::new(-0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))],
                dc: ZERO,
            }
        }
    }

    /// Uniform angle samples (`M >= 4`), interpolated by a periodic cubic spline.
    pub fn sampled(samples: Vec<Complex64>) -> Result<Self> {
        Ok(SphereSymbol::Sampled {
            spline: PeriodicSpline::new(samples)?,
            dc: ZERO,
        })
    }

    pub fn with_dc(mut self, value: Complex64) -> Self {
        match &mut self {
            SphereSymbol::Line { dc, .. }
            | SphereSymbol::Trig { dc, .. }
            | SphereSymbol::Sampled { dc, .. } => *dc = value,
        }
        self
    }

    pub fn dim(&self) -> usize {
        match self {
            SphereSymbol::Line { .. } => 1,
            _ => 2,
        }
    }

    pub fn dc(&self) -> Complex64 {
        match self {
            SphereSymbol::Line { dc, .. }
            | SphereSymbol::Trig { dc, .. }
            | SphereSymbol::Sampled { dc, .. } => *dc,
        }
    }

    /// `theta(y)` at a unit vector (only `y[0]` is read in d=1).
    pub fn on_sphere(&self, y: [f64; 2]) -> Complex64 {
        match self {
            SphereSymbol::Line { plus, minus, .. } => {
                if y[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            SphereSymbol::Trig { coeffs, .. } => {
                let phi = y[1].atan2(y[0]);
                coeffs
                    .iter()
                    .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * phi))
                    .sum()
            }
            SphereSymbol::Sampled { spline, .. } => spline.eval(y[1].atan2(y[0])),
        }
    }

    /// `theta(xi / |xi|)`, or the DC value at `xi = 0`.
    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        if r == 0.0 {
            self.dc()
        } else {
            self.on_sphere([xi[0] / r, xi[1] / r])
        }
    }

    /// Largest modulus over the sphere (sampled densely in d=2) and the DC value.
    pub fn sup(&self) -> f64 {
        let s = match self {
            SphereSymbol::Line { plus, minus, .. } => plus.norm().max(minus.norm()),
            _ => (0..4096)
                .map(|m| {
                    let phi = 2.0 * PI * m as f64 / 4096.0;
                    self.on_sphere([phi.cos(), phi.sin()]).norm()
                })
                .fold(0.0, f64::max),
        };
        s.max(self.dc().norm())
    }
}

/// Periodic cubic spline through uniform samples on `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    values: Vec<Complex64>,
    second: Vec<Complex64>,
}

impl PeriodicSpline {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        let m = values.len();
        if m < 4 {
            return param("samples", format!("need at least 4 angle samples, got {m}"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return param("samples", "non-finite symbol sample");
        }
        let step = 2.0 * PI / m as f64;
        // Cyclic system M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / step^2,
        // solved by Sherman-Morrison on a tridiagonal core.
        let rhs: Vec<Complex64> = (0..m)
            .map(|i| {
                (values[(i + 1) % m] - values[i] * 2.0 + values[(i + m - 1) % m]) * (6.0 / (step * step))
            })
            .collect();
        let second = solve_cyclic(m, &rhs);
        Ok(Self { values, second })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, phi: f64) -> Complex64 {
        let m = self.values.len();
        let step = 2.0 * PI / m as f64;
        let s = phi.rem_euclid(2.0 * PI) / step;
        let i = (s.floor() as usize).min(m - 1);
        let u = s - i as f64;
        let j = (i + 1) % m;
        let a = 1.0 - u;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.second[i], self.second[j]);
        y0 * a + y1 * u + (m0 * (a * a * a - a) + m1 * (u * u * u - u)) * (step * step / 6.0)
    }
}

/// Solves the cyclic system with diagonal 4 and unit off-diagonals.
fn solve_cyclic(m: usize, rhs: &[Complex64]) -> Vec<Complex64> {
    let gamma = -4.0;
    let mut diag = vec![4.0; m];
    diag[0] -= gamma;
    diag[m - 1] -= 1.0 / gamma;
    let x = solve_tridiagonal(&diag, rhs);
    let mut u = vec![Complex64::new(0.0, 0.0); m];
    u[0] = Complex64::new(gamma, 0.0);
    u[m - 1] = Complex64::new(1.0, 0.0);
    let z = solve_tridiagonal(&diag, &u);
    let vx = x[0] + x[m - 1] / gamma;
    let vz = z[0] + z[m - 1] / gamma;
    let factor = vx / (Complex64::new(1.0, 0.0) + vz);
    x.iter().zip(&z).map(|(a, b)| a - b * factor).collect()
}

fn solve_tridiagonal(diag: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    c[0] = 1.0 / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let denom = diag[i] - c[i - 1];
        c[i] = 1.0 / denom;
        d[i] = (rhs[i] - d[i - 1]) / denom;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - x[i + 1] * c[i];
    }
    x
}

/// A nonempty list of symbols of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFamily {
    symbols: Vec<SphereSymbol>,
}

impl MultiplierFamily {
    pub fn new(symbols: Vec<SphereSymbol>) -> Result<Self> {
        let Some(first) = symbols.first() else {
            return param("family", "empty multiplier family");
        };
        let d = first.dim();
        if symbols.iter().any(|s| s.dim() != d) {
            return param("family", "symbols of mixed dimension");
        }
        Ok(Self { symbols })
    }

    /// `{1, sign}` in d=1.
    pub fn identity_and_sign() -> Self {
        Self {
            symbols: vec![
                SphereSymbol::constant(1, Complex64::new(1.0, 0.0)),
                SphereSymbol::sign(),
            ],
        }
    }

    /// `{1, -i z_1, ..., -i z_d}`: the identity with the Riesz symbols.
    pub fn identity_and_riesz(dim: usize) -> Self {
        let mut symbols = vec![SphereSymbol::constant(dim, Complex64::new(1.0, 0.0))];
        symbols.extend((1..=dim).map(|j| SphereSymbol::riesz(dim, j)));
        Self { symbols }
    }

    pub fn symbols(&self) -> &[SphereSymbol] {
        &self.symbols
    }

    pub fn dim(&self) -> usize {
        self.symbols[0].dim()
    }
}

/// `(theta(xi/|xi|) f^)^v`, with the DC coefficient multiplied by the symbol's DC value.
pub fn apply_multiplier(f: &GridFunction, theta: &SphereSymbol) -> Result<GridFunction> {
    if theta.dim() != f.spec().dim() {
        return Err(Error::Mismatch(format!(
            "symbol of dimension {} applied on a {}-dimensional grid",
            theta.dim(),
            f.spec().dim()
        )));
    }
    Ok(map_spectrum(f, |xi| theta.eval(xi)))
}

/// Riesz symbol `-i xi_j / |xi|` (0 at the origin); `j` is 1-based.
pub fn riesz_symbol(xi: [f64; 2], j: usize) -> Complex64 {
    let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    if r == 0.0 {
        ZERO
    } else {
        Complex64::new(0.0, -xi[j - 1] / r)
    }
}

/// `R_j f`.
pub fn riesz(f: &GridFunction, j: usize) -> Result<GridFunction> {
    check_axis(j, f.spec().dim())?;
    Ok(map_spectrum(f, |xi| riesz_symbol(xi, j)))
}

/// `R_{j_1} ... R_{j_k} f` in one pass with the product symbol.
pub fn riesz_compose(f: &GridFunction, indices: &[usize]) -> Result<GridFunction> {
    if indices.is_empty() {
        return param("indices", "empty composition");
    }
    for &j in indices {
        check_axis(j, f.spec().dim())?;
    }
    Ok(map_spectrum(f, |xi| {
        indices.iter().fold(Complex64::new(1.0, 0.0), |acc, &j| acc * riesz_symbol(xi, j))
    }))
}

/// `d f / d x_j` with the symbol `2 pi i xi_j`.
pub fn partial(f: &GridFunction, j: usize) -> Result<GridFunction> {
    check_axis(j, f.spec().dim())?;
    Ok(map_spectrum(f, |xi| Complex64::new(0.0, 2.0 * PI * xi[j - 1])))
}

/// Spectral Laplacian, symbol `-4 pi^2 |xi|^2`.
pub fn laplacian(f: &GridFunction) -> GridFunction {
    map_spectrum(f, |xi| Complex64::new(-4.0 * PI * PI * (xi[0] * xi[0] + xi[1] * xi[1]), 0.0))
}

/// Periodic convolution scaled to the continuum: `(f * g)(x) ~ h^d sum_y f(y) g(x - y)`.
pub fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.spec().ensure_same(g.spec())?;
    Ok(Spectrum::of(f).convolve_with(&Spectrum::of(g)))
}

/// Outcome of the rank-2 test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank2Outcome {
    pub ok: bool,
    pub min_sigma2: f64,
    pub reason: Option<String>,
}

/// Smallest second singular value over sampled directions `y` of the `2 x m` matrix
/// with rows `theta_i(y)` and `theta_i(-y)`.
pub fn rank2_check(family: &MultiplierFamily, samples: usize, tol: f64) -> Result<Rank2Outcome> {
    if samples < 2 && family.dim() == 2 {
        return param("samples", "need at least 2 directions");
    }
    if family.symbols.len() < 2 {
        return Ok(Rank2Outcome {
            ok: false,
            min_sigma2: 0.0,
            reason: Some("a single symbol cannot have rank 2".into()),
        });
    }
    let dirs: Vec<[f64; 2]> = if family.dim() == 1 {
        vec![[1.0, 0.0]]
    } else {
        (0..samples)
            .map(|s| {
                let phi = 2.0 * PI * s as f64 / samples as f64;
                [phi.cos(), phi.sin()]
            })
            .collect()
    };
    let mut min_sigma2 = f64::INFINITY;
    for y in dirs {
        let top: Vec<Complex64> = family.symbols.iter().map(|s| s.on_sphere(y)).collect();
        let bot: Vec<Complex64> = family.symbols.iter().map(|s| s.on_sphere([-y[0], -y[1]])).collect();
        min_sigma2 = min_sigma2.min(second_singular_value(&top, &bot));
    }
    let ok = min_sigma2 > tol;
    Ok(Rank2Outcome {
        ok,
        min_sigma2,
        reason: (!ok).then(|| format!("second singular value {min_sigma2:e} <= {tol:e}")),
    })
}

/// Second singular value of the `2 x m` matrix `[a; b]` from its Gram matrix.
fn second_singular_value(a: &[Complex64], b: &[Complex64]) -> f64 {
    let aa: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let bb: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    let ab: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let tr = aa + bb;
    let det = (aa * bb - ab.norm_sqr()).max(0.0);
    let disc = ((aa - bb).powi(2) + 4.0 * ab.norm_sqr()).sqrt();
    let big = 0.5 * (tr + disc);
    // det / big avoids cancellation in the small eigenvalue.
    let small = if big > 0.0 { det / big } else { 0.0 };
    small.sqrt()
}
