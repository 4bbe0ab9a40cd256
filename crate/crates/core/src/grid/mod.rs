//! Sampled-function substrate: the periodic box `[-L, L)^d`, complex samples on it,
//! the continuum-scaled Fourier layer and plain Lebesgue norms.
//!
//! Nodes sit at cell left edges, `x_k = -L + k h`, so every unit cube `k + [0,1)^d`
//! with integer `k` contains a whole number of cells.

mod fft;
pub mod io;
mod sample;

pub use fft::{forward_transform, inverse_transform, SpectralFunction};
pub(crate) use fft::{from_transform, map_spectrum, map_spectrum_many, Spectrum};
pub use sample::{sample, FunctionSpec};

use crate::error::{param, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Validated description of the sampling box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    half_extent: usize,
    n: usize,
}

impl GridSpec {
    /// Builds a grid on `[-L, L)^d` with `n` points per axis.
    ///
    /// `L` must be a positive integer and `n` a power of two divisible by `2L`.
    pub fn new(dim: usize, half_extent: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(half_extent.is_finite() && half_extent >= 1.0 && half_extent.fract() == 0.0) {
            return Err(Error::Grid(format!(
                "half extent must be a positive integer, got {half_extent}"
            )));
        }
        let l = half_extent as usize;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("n must be a power of two >= 2, got {n}")));
        }
        if n % (2 * l) != 0 {
            return Err(Error::Grid(format!(
                "n = {n} is not divisible by 2L = {}: unit cubes would split cells",
                2 * l
            )));
        }
        Ok(Self {
            dim,
            half_extent: l,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> usize {
        self.half_extent
    }

    /// Box half width as a float.
    pub fn l(&self) -> f64 {
        self.half_extent as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing `2L / n`.
    pub fn h(&self) -> f64 {
        2.0 * self.l() / self.n as f64
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Samples per unit length along an axis.
    pub fn cells_per_unit(&self) -> usize {
        self.n / (2 * self.half_extent)
    }

    /// Total number of samples `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `k` along any axis.
    pub fn node(&self, k: usize) -> f64 {
        -self.l() + k as f64 * self.h()
    }

    /// Index of the node at the origin along any axis.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Signed frequency index of storage slot `i` in `{-n/2, ..., n/2 - 1}`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Frequency `k / (2L)` of storage slot `i`.
    pub fn frequency(&self, i: usize) -> f64 {
        self.signed_index(i) as f64 / (2.0 * self.l())
    }

    /// Frequency spacing `1 / (2L)`.
    pub fn frequency_step(&self) -> f64 {
        1.0 / (2.0 * self.l())
    }

    /// Largest representable frequency magnitude `n / (4L)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (4.0 * self.l())
    }

    /// Splits a flat row-major index into per-axis indices.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flatten(&self, ix: [usize; 2]) -> usize {
        if self.dim == 1 {
            ix[0]
        } else {
            ix[0] * self.n + ix[1]
        }
    }

    /// Coordinates of the node with flat index `idx` (unused axes are 0).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let ix = self.unflatten(idx);
        if self.dim == 1 {
            [self.node(ix[0]), 0.0]
        } else {
            [self.node(ix[0]), self.node(ix[1])]
        }
    }

    /// Frequency vector of the storage slot with flat index `idx`.
    pub fn frequency_vector(&self, idx: usize) -> [f64; 2] {
        let ix = self.unflatten(idx);
        if self.dim == 1 {
            [self.frequency(ix[0]), 0.0]
        } else {
            [self.frequency(ix[0]), self.frequency(ix[1])]
        }
    }

    /// Identifier used to key frozen constants, e.g. `d1-L32-n4096`.
    pub fn grid_id(&self) -> String {
        format!("d{}-L{}-n{}", self.dim, self.half_extent, self.n)
    }

    /// Same box with twice the resolution.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.l(), self.n * 2)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::Mismatch(format!(
                "{} vs {}",
                self.grid_id(),
                other.grid_id()
            )));
        }
        Ok(())
    }
}

/// Validates `(d, L, n)` into a [`GridSpec`].
pub fn make_grid(dim: usize, half_extent: f64, n: usize) -> Result<GridSpec> {
    GridSpec::new(dim, half_extent, n)
}

/// Complex samples on a [`GridSpec`], row-major over axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Mismatch(format!(
                "expected {} samples for {}, got {}",
                spec.len(),
                spec.grid_id(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("non-finite sample".into()));
        }
        Ok(Self { spec, values })
    }

    /// Internal constructor for values produced by trusted arithmetic.
    pub(crate) fn from_parts(spec: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::from_parts(spec, vec![Complex64::new(0.0, 0.0); spec.len()])
    }

    pub fn constant(spec: GridSpec, c: Complex64) -> Self {
        Self::from_parts(spec, vec![c; spec.len()])
    }

    /// Samples `f` at every node; the closure receives the first `d` coordinates.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = spec.dim();
        let values = (0..spec.len())
            .map(|i| {
                let x = spec.point(i);
                f(&x[..d])
            })
            .collect();
        Self::from_parts(spec, values)
    }

    pub fn from_real_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(spec, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(spec: GridSpec, values: &[f64]) -> Result<Self> {
        Self::new(spec, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    pub fn at(&self, ix: [usize; 2]) -> Complex64 {
        self.values[self.spec.flatten(ix)]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.spec.ensure_same(&other.spec)?;
        Ok(Self::from_parts(
            self.spec,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &GridFunction, b: Complex64) -> Result<Self> {
        self.zip_with(other, |x, y| a * x + b * y)
    }

    /// Pointwise modulus as a real vector.
    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Pointwise modulus as a grid function.
    pub fn modulus(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Drops imaginary parts.
    pub fn to_real(&self) -> Self {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Integral `h^d sum f` over the box.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.spec.cell_volume()
    }

    /// Average value over the box.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// Subtracts the box average so the zero-frequency coefficient vanishes.
    pub fn remove_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// `(h^d sum |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.spec.cell_volume()).sqrt()
    }

    /// Relative L2 distance `|self - other| / |other|`.
    pub fn relative_l2(&self, reference: &GridFunction) -> Result<f64> {
        self.spec.ensure_same(&reference.spec)?;
        let num: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        if den == 0.0 {
            return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok((num / den).sqrt())
    }

    /// Largest pointwise difference.
    pub fn max_diff(&self, other: &GridFunction) -> Result<f64> {
        self.spec.ensure_same(&other.spec)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Shifts by whole cells along each axis (periodic): `out(x) = f(x - s h)`.
    pub fn shift_cells(&self, shift: [i64; 2]) -> Self {
        let spec = self.spec;
        let n = spec.n() as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); spec.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let ix = spec.unflatten(idx);
            let src0 = (ix[0] as i64 - shift[0]).rem_euclid(n) as usize;
            let src1 = if spec.dim() == 2 {
                (ix[1] as i64 - shift[1]).rem_euclid(n) as usize
            } else {
                0
            };
            *slot = self.values[spec.flatten([src0, src1])];
        }
        Self::from_parts(spec, out)
    }
}

/// Lebesgue (quasi-)norm `(h^d sum |f|^p)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return param("p", format!("must be positive and finite, got {p}"));
    }
    let s: f64 = f.values.iter().map(|v| v.norm().powf(p)).sum();
    Ok((s * f.spec.cell_volume()).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_examples() {
        assert_eq!(make_grid(1, 32.0, 1024).unwrap().h(), 1.0 / 16.0);
        assert_eq!(make_grid(2, 8.0, 128).unwrap().h(), 1.0 / 8.0);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(make_grid(1, 32.0, 100).is_err());
        assert!(make_grid(1, 2.5, 64).is_err());
        assert!(make_grid(3, 2.0, 64).is_err());
        assert!(make_grid(1, 32.0, 32).is_err());
        assert!(make_grid(1, 0.0, 32).is_err());
    }

    #[test]
    fn node_and_frequency_layout() {
        let g = make_grid(1, 4.0, 16).unwrap();
        assert_eq!(g.node(0), -4.0);
        assert_eq!(g.node(g.origin_index()), 0.0);
        assert_eq!(g.signed_index(8), -8);
        assert_eq!(g.frequency(1), 0.125);
        assert_eq!(g.cells_per_unit(), 2);
        assert_eq!(g.grid_id(), "d1-L4-n16");
    }

    #[test]
    fn indicator_norms() {
        let g = make_grid(1, 32.0, 1024).unwrap();
        let one = GridFunction::from_real_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let two = GridFunction::from_real_fn(g, |x| if (0.0..2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        assert!((one.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((two.lp_norm(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(one.lp_norm(0.0).is_err());
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = make_grid(1, 32.0, 1024).unwrap();
        let f = GridFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let expect = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((f.lp_norm(2.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn shift_is_periodic() {
        let g = make_grid(1, 2.0, 8).unwrap();
        let f = GridFunction::from_real_fn(g, |x| x[0]);
        let s = f.shift_cells([1, 0]);
        assert_eq!(s.get(1), f.get(0));
        assert_eq!(s.get(0), f.get(7));
    }

    #[test]
    fn construction_validates_length_and_finiteness() {
        let g = make_grid(1, 1.0, 4).unwrap();
        assert!(GridFunction::new(g, vec![Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(GridFunction::from_real(g, &[0.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
