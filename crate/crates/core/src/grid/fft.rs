//! FFT layer scaled to approximate the continuum transform
//! `F(xi) = \int f(x) e^{-2 pi i x . xi} dx` at frequencies `xi_k = k / (2L)`.

use super::{GridFunction, GridSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, plans) = &mut *guard;
    plans
        .entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized d-dimensional DFT in place (`inverse` uses `e^{+2 pi i}` and no scaling).
fn dft_in_place(spec: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = spec.n();
    let p = plan(n, inverse);
    p.process(data);
    if spec.dim() == 2 {
        transpose_square(data, n);
        p.process(data);
        transpose_square(data, n);
    }
}

/// `(-1)^{sum k}` over the signed frequency indices of a flat slot.
fn alternating_sign(spec: &GridSpec, idx: usize) -> f64 {
    let ix = spec.unflatten(idx);
    let s = ix[0] + if spec.dim() == 2 { ix[1] } else { 0 };
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Continuum-scaled spectrum of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Coefficients in FFT storage order (slot `i` has signed index `spec.signed_index(i)`).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed frequency indices `k` (second entry ignored in d=1).
    pub fn at(&self, k: [i64; 2]) -> Complex64 {
        let n = self.spec.n() as i64;
        let i0 = k[0].rem_euclid(n) as usize;
        let i1 = k[1].rem_euclid(n) as usize;
        self.coeffs[self.spec.flatten([i0, i1])]
    }

    /// Value at the sampled frequency nearest to `xi` along axis 1 (d=1 convenience).
    pub fn at_frequency(&self, xi: f64) -> Complex64 {
        let k = (xi * 2.0 * self.spec.l()).round() as i64;
        self.at([k, 0])
    }

    /// `(1/(2L))^d sum |F|^2`, equal to `h^d sum |f|^2` of the spatial samples.
    pub fn energy(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        s * self.spec.frequency_step().powi(self.spec.dim() as i32)
    }
}

/// Forward transform `F(xi_k) = h^d (-1)^{sum k} DFT(f)_k`.
pub fn forward_transform(f: &GridFunction) -> SpectralFunction {
    let spec = *f.spec();
    let mut data = f.values().to_vec();
    dft_in_place(&spec, &mut data, false);
    let hd = spec.cell_volume();
    for (i, c) in data.iter_mut().enumerate() {
        *c *= hd * alternating_sign(&spec, i);
    }
    SpectralFunction { spec, coeffs: data }
}

/// Inverse of [`forward_transform`].
pub fn inverse_transform(s: &SpectralFunction) -> GridFunction {
    let spec = s.spec;
    let scale = 1.0 / (spec.cell_volume() * spec.len() as f64);
    let mut data: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * alternating_sign(&spec, i) * scale)
        .collect();
    dft_in_place(&spec, &mut data, true);
    GridFunction::from_parts(spec, data)
}

/// Samples of the periodic function whose continuum transform at `xi_k` is `transform(xi_k)`.
pub(crate) fn from_transform(
    spec: GridSpec,
    transform: impl Fn([f64; 2]) -> Complex64,
) -> GridFunction {
    let coeffs = (0..spec.len())
        .map(|i| transform(spec.frequency_vector(i)))
        .collect();
    inverse_transform(&SpectralFunction { spec, coeffs })
}

/// Raw DFT of a grid function, reused across several symbol applications.
///
/// Multipliers act on raw DFT coefficients directly: the `h^d (-1)^k` factors of the
/// continuum scaling cancel between the forward and inverse passes.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    spec: GridSpec,
    raw: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &GridFunction) -> Self {
        let spec = *f.spec();
        let mut raw = f.values().to_vec();
        dft_in_place(&spec, &mut raw, false);
        Self { spec, raw }
    }

    /// Inverse transform of the spectrum multiplied by `symbol(xi)`.
    pub fn apply(&self, symbol: impl Fn([f64; 2]) -> Complex64) -> GridFunction {
        let spec = self.spec;
        let mut data: Vec<Complex64> = self
            .raw
            .iter()
            .enumerate()
            .map(|(i, &c)| c * symbol(spec.frequency_vector(i)))
            .collect();
        dft_in_place(&spec, &mut data, true);
        let s = 1.0 / spec.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
        GridFunction::from_parts(spec, data)
    }

    /// Raw product with another spectrum, including the half-box shift used by convolution.
    pub fn convolve_with(&self, other: &Spectrum) -> GridFunction {
        let spec = self.spec;
        let hd = spec.cell_volume();
        let s = hd / spec.len() as f64;
        let mut data: Vec<Complex64> = self
            .raw
            .iter()
            .zip(&other.raw)
            .enumerate()
            .map(|(i, (&a, &b))| a * b * alternating_sign(&spec, i) * s)
            .collect();
        dft_in_place(&spec, &mut data, true);
        GridFunction::from_parts(spec, data)
    }
}

/// Applies `symbol` to the spectrum of `f` and transforms back.
pub(crate) fn map_spectrum(
    f: &GridFunction,
    symbol: impl Fn([f64; 2]) -> Complex64,
) -> GridFunction {
    Spectrum::of(f).apply(symbol)
}

/// One forward pass, then one inverse pass per parameter value (in parallel).
pub(crate) fn map_spectrum_many<P: Sync>(
    f: &GridFunction,
    params: &[P],
    symbol: impl Fn(&P, [f64; 2]) -> Complex64 + Sync,
) -> Vec<GridFunction> {
    let s = Spectrum::of(f);
    params
        .par_iter()
        .map(|p| s.apply(|xi| symbol(p, xi)))
        .collect()
}
