//! Residuals of the harmonic and caloric Cauchy-Riemann systems for a vector of stacks
//! `F = (u_1, ..., u_d, u_{d+1})`, with `x_{d+1}` identified with `t`, and the
//! vector amalgam norm `sup_t || |F(., t)| ||_{p,q}`.

use crate::amalgam::{discrete_norm, Exponents};
use crate::error::{param, Error, Result};
use crate::extension::{ExtensionStack, KernelTag};
use crate::grid::GridFunction;
use crate::spectral::partial;
use crate::weyl::{
    half_derivative_spectral, half_derivative_stack_quadrature, time_derivative, Tail, WeylOptions,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Harmonic,
    Caloric,
}

/// `d + 1` stacks on one grid and one time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateField {
    components: Vec<ExtensionStack>,
    flavor: Flavor,
}

impl ConjugateField {
    pub fn new(components: Vec<ExtensionStack>, flavor: Flavor) -> Result<Self> {
        let Some(first) = components.first() else {
            return param("components", "empty field");
        };
        let d = first.spec().dim();
        if components.len() != d + 1 {
            return Err(Error::Mismatch(format!(
                "{} components for dimension {d}; expected {}",
                components.len(),
                d + 1
            )));
        }
        for c in &components[1..] {
            first.spec().ensure_same(c.spec())?;
            if c.times() != first.times() {
                return Err(Error::Mismatch("components use different time grids".into()));
            }
        }
        Ok(Self { components, flavor })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn components(&self) -> &[ExtensionStack] {
        &self.components
    }

    /// Component `i` (1-based; `d + 1` is the time component).
    pub fn component(&self, i: usize) -> &ExtensionStack {
        &self.components[i - 1]
    }

    pub fn dim(&self) -> usize {
        self.components[0].spec().dim()
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.components[0].is_empty()
    }

    /// Same field with component `i` (1-based) multiplied by `c`.
    pub fn scale_component(&self, i: usize, c: Complex64) -> Result<Self> {
        if i == 0 || i > self.components.len() {
            return param("component", format!("index {i} outside 1..={}", self.components.len()));
        }
        let mut components = self.components.clone();
        components[i - 1] = components[i - 1].scale(c);
        Ok(Self {
            components,
            flavor: self.flavor,
        })
    }

    /// Pointwise Euclidean magnitude `|F(., t_k)|`.
    pub fn magnitude(&self, k: usize) -> Vec<f64> {
        let n = self.components[0].spec().len();
        (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.slice(k).get(i).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// `sum_i ||u_i(., t_k)||_2`, the scale residuals are measured against.
    fn slice_scale(&self, k: usize) -> f64 {
        self.components.iter().map(|c| c.slice(k).l2_norm()).sum()
    }
}

/// How time derivatives were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimePath {
    Spectral,
    FiniteDifference,
    Mixed,
}

/// Route for the half-derivative in the caloric system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfDerivativeMode {
    Spectral,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicResidual {
    pub sym_res: f64,
    pub div_res: f64,
    pub sym_per_slice: Vec<f64>,
    pub div_per_slice: Vec<f64>,
    pub time_path: TimePath,
    pub grid_id: String,
    pub time_grid_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaloricResidual {
    pub a_res: f64,
    pub b_res: f64,
    pub c_res: f64,
    pub a_per_slice: Vec<f64>,
    pub b_per_slice: Vec<f64>,
    pub c_per_slice: Vec<f64>,
    pub mode: HalfDerivativeMode,
    pub grid_id: String,
    pub time_grid_id: String,
}

fn check_flavor(field: &ConjugateField, want: Flavor) -> Result<()> {
    if field.flavor != want {
        return Err(Error::Mismatch(format!(
            "expected a {want:?} field, got {:?}",
            field.flavor
        )));
    }
    Ok(())
}

/// Slices smaller than this fraction of the largest slice hold only rounding noise, so
/// their residuals are measured against the floor instead of their own size.
pub const RESOLUTION_FLOOR: f64 = 1e-12;

/// Per-slice scales, floored at `RESOLUTION_FLOOR` times the largest one.
fn scales(field: &ConjugateField) -> Result<Vec<f64>> {
    let s: Vec<f64> = (0..field.len()).map(|k| field.slice_scale(k)).collect();
    let peak = s.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Numerical("degenerate scale: the field is identically zero".into()));
    }
    Ok(s.into_iter().map(|v| v.max(RESOLUTION_FLOOR * peak)).collect())
}

/// `||a - b||_2 / scale`, or 0 on a slice whose scale vanishes.
fn relative(diff: &GridFunction, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        diff.l2_norm() / scale
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// `d u / d x_j` slice by slice.
fn stack_partial(u: &ExtensionStack, j: usize) -> Result<ExtensionStack> {
    u.map_slices(|s, _| partial(s, j))
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Residuals of `d_k u_j = d_j u_k` (all pairs, `x_{d+1} = t`) and `sum_j d_j u_j = 0`.
pub fn harmonic_cr_residual(field: &ConjugateField) -> Result<HarmonicResidual> {
    check_flavor(field, Flavor::Harmonic)?;
    let d = field.dim();
    let scale = scales(field)?;
    let u = &field.components;
    let mut dx: Vec<Vec<ExtensionStack>> = Vec::with_capacity(d + 1);
    for ui in u {
        dx.push((1..=d).map(|j| stack_partial(ui, j)).collect::<Result<Vec<_>>>()?);
    }
    let dt: Vec<ExtensionStack> = u.iter().map(time_derivative).collect::<Result<Vec<_>>>()?;
    let spectral = u.iter().filter(|c| c.kernel() != KernelTag::Custom).count();
    let time_path = match spectral {
        s if s == u.len() => TimePath::Spectral,
        0 => TimePath::FiniteDifference,
        _ => TimePath::Mixed,
    };
    // derivative of component i (0-based) along axis a (0-based; a == d is t)
    let deriv = |i: usize, a: usize, k: usize| -> &GridFunction {
        if a == d {
            dt[i].slice(k)
        } else {
            dx[i][a].slice(k)
        }
    };
    let per: Vec<(f64, f64)> = (0..field.len())
        .into_par_iter()
        .map(|k| {
            let mut sym = 0.0f64;
            for j in 0..=d {
                for a in j + 1..=d {
                    let diff = deriv(j, a, k).sub(deriv(a, j, k))?;
                    sym = sym.max(relative(&diff, scale[k]));
                }
            }
            let mut div = deriv(0, 0, k).clone();
            for j in 1..=d {
                div = div.combine(one(), deriv(j, j, k), one())?;
            }
            Ok((sym, relative(&div, scale[k])))
        })
        .collect::<Result<Vec<_>>>()?;
    let sym_per_slice: Vec<f64> = per.iter().map(|p| p.0).collect();
    let div_per_slice: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(HarmonicResidual {
        sym_res: max_of(&sym_per_slice),
        div_res: max_of(&div_per_slice),
        sym_per_slice,
        div_per_slice,
        time_path,
        grid_id: field.components[0].spec().grid_id(),
        time_grid_id: field.components[0].times().id(),
    })
}

/// Slowest nonconstant heat mode on the box, `4 pi^2 / (2L)^2`: the decay rate every
/// mean-free heat profile eventually follows.
pub fn default_tail(field: &ConjugateField) -> Tail {
    let period = 2.0 * field.components[0].spec().l();
    Tail::ExpDecay(4.0 * PI * PI / (period * period))
}

/// Caloric residuals with the default tail and tolerances.
pub fn caloric_cr_residual(field: &ConjugateField, mode: HalfDerivativeMode) -> Result<CaloricResidual> {
    caloric_cr_residual_with(field, mode, default_tail(field), &WeylOptions::default())
}

/// Residuals of
/// a) `sum_j d_j u_j = i d_t^{1/2} u_{d+1}`,
/// b) `d_k u_j = d_j u_k` for spatial pairs,
/// c) `d_j u_{d+1} = -i d_t^{1/2} u_j`.
///
/// In quadrature mode each slice's spatial mean is removed first: it is constant in `t`
/// for a caloric field and carries no half-derivative.
pub fn caloric_cr_residual_with(
    field: &ConjugateField,
    mode: HalfDerivativeMode,
    tail: Tail,
    opts: &WeylOptions,
) -> Result<CaloricResidual> {
    check_flavor(field, Flavor::Caloric)?;
    let d = field.dim();
    let scale = scales(field)?;
    let u = &field.components;
    let half: Vec<ExtensionStack> = match mode {
        HalfDerivativeMode::Spectral => {
            if let Some(c) = u.iter().find(|c| c.kernel() != KernelTag::Heat) {
                return Err(Error::Mismatch(format!(
                    "spectral half-derivative needs heat stacks, got {}",
                    c.kernel().name()
                )));
            }
            u.iter().map(half_derivative_spectral).collect::<Result<Vec<_>>>()?
        }
        HalfDerivativeMode::Quadrature => u
            .iter()
            .map(|c| {
                let centered = c.map_slices(|s, _| Ok(s.remove_mean()))?;
                half_derivative_stack_quadrature(&centered, tail, opts)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let mut dx: Vec<Vec<ExtensionStack>> = Vec::with_capacity(d + 1);
    for ui in u {
        dx.push((1..=d).map(|j| stack_partial(ui, j)).collect::<Result<Vec<_>>>()?);
    }
    let i_unit = Complex64::new(0.0, 1.0);
    let per: Vec<[f64; 3]> = (0..field.len())
        .into_par_iter()
        .map(|k| {
            let mut div = dx[0][0].slice(k).clone();
            for j in 1..d {
                div = div.combine(one(), dx[j][j].slice(k), one())?;
            }
            let a = div.combine(one(), half[d].slice(k), -i_unit)?;
            let mut b = 0.0f64;
            for j in 0..d {
                for m in j + 1..d {
                    let diff = dx[j][m].slice(k).sub(dx[m][j].slice(k))?;
                    b = b.max(relative(&diff, scale[k]));
                }
            }
            let mut c = 0.0f64;
            for j in 0..d {
                let diff = dx[d][j].slice(k).combine(one(), half[j].slice(k), i_unit)?;
                c = c.max(relative(&diff, scale[k]));
            }
            Ok([relative(&a, scale[k]), b, c])
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |i: usize| per.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let (a_per_slice, b_per_slice, c_per_slice) = (col(0), col(1), col(2));
    Ok(CaloricResidual {
        a_res: max_of(&a_per_slice),
        b_res: max_of(&b_per_slice),
        c_res: max_of(&c_per_slice),
        a_per_slice,
        b_per_slice,
        c_per_slice,
        mode,
        grid_id: field.components[0].spec().grid_id(),
        time_grid_id: field.components[0].times().id(),
    })
}

/// `max_t || |F(., t)| ||_{p,q}` with the Euclidean magnitude over components.
pub fn sup_vector_amalgam_norm(field: &ConjugateField, e: Exponents) -> f64 {
    let spec = *field.components[0].spec();
    (0..field.len())
        .into_par_iter()
        .map(|k| discrete_norm(&spec, &field.magnitude(k), e))
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{extend, TimeGrid};
    use crate::grid::{make_grid, sample, FunctionSpec};
    use crate::spectral::riesz;

    fn lift(f: &GridFunction, kernel: KernelTag, tg: &TimeGrid, flavor: Flavor) -> ConjugateField {
        let d = f.spec().dim();
        let mut comps: Vec<ExtensionStack> = (1..=d)
            .map(|j| extend(&riesz(f, j).unwrap(), kernel, tg).unwrap())
            .collect();
        comps.push(extend(f, kernel, tg).unwrap());
        ConjugateField::new(comps, flavor).unwrap()
    }

    fn gaussian(d: usize) -> GridFunction {
        let spec = make_grid(d, 8.0, if d == 1 { 256 } else { 64 }).unwrap();
        sample(&FunctionSpec::MeanFreeGaussian { center: vec![], width: 1.0 }, spec).unwrap()
    }

    #[test]
    fn harmonic_system_holds_and_detects_perturbations() {
        let tg = TimeGrid::log_spaced(1e-2, 4.0, 8).unwrap();
        for d in [1, 2] {
            let field = lift(&gaussian(d), KernelTag::Poisson, &tg, Flavor::Harmonic);
            let r = harmonic_cr_residual(&field).unwrap();
            assert!(r.sym_res < 1e-10 && r.div_res < 1e-10, "{r:?}");
            assert_eq!(r.time_path, TimePath::Spectral);
            let bad = field.scale_component(1, Complex64::new(2.0, 0.0)).unwrap();
            assert!(harmonic_cr_residual(&bad).unwrap().div_res > 1e-2);
        }
    }

    #[test]
    fn caloric_system_spectral() {
        let tg = TimeGrid::log_spaced(1e-2, 4.0, 8).unwrap();
        for d in [1, 2] {
            let field = lift(&gaussian(d), KernelTag::Heat, &tg, Flavor::Caloric);
            let r = caloric_cr_residual(&field, HalfDerivativeMode::Spectral).unwrap();
            assert!(r.a_res < 1e-10 && r.b_res < 1e-10 && r.c_res < 1e-10, "{r:?}");
            if d == 1 {
                assert_eq!(r.b_res, 0.0);
            }
            let flipped = field.scale_component(d + 1, Complex64::new(-1.0, 0.0)).unwrap();
            let r = caloric_cr_residual(&flipped, HalfDerivativeMode::Spectral).unwrap();
            assert!(r.a_res > 1e-1 && r.c_res > 1e-1);
        }
    }

    #[test]
    fn flavor_and_zero_field_errors() {
        let tg = TimeGrid::log_spaced(1e-2, 4.0, 4).unwrap();
        let f = gaussian(1);
        let field = lift(&f, KernelTag::Poisson, &tg, Flavor::Harmonic);
        assert!(caloric_cr_residual(&field, HalfDerivativeMode::Spectral).is_err());
        let zero = lift(&GridFunction::zeros(*f.spec()), KernelTag::Poisson, &tg, Flavor::Harmonic);
        assert!(harmonic_cr_residual(&zero).is_err());
        let heat = lift(&f, KernelTag::Heat, &tg, Flavor::Caloric).components().to_vec();
        let custom: Vec<ExtensionStack> = heat.into_iter().map(|c| c.into_custom()).collect();
        let custom = ConjugateField::new(custom, Flavor::Caloric).unwrap();
        assert!(caloric_cr_residual(&custom, HalfDerivativeMode::Spectral).is_err());
    }

    #[test]
    fn vector_norm_properties() {
        let tg = TimeGrid::log_spaced(1e-2, 4.0, 6).unwrap();
        let f = gaussian(1);
        let field = lift(&f, KernelTag::Poisson, &tg, Flavor::Harmonic);
        let e = Exponents::new(1.5, 2.0).unwrap();
        let full = sup_vector_amalgam_norm(&field, e);
        let last = field.component(2).tent_norm(e);
        assert!(full >= last);
        let scaled = ConjugateField::new(
            field.components().iter().map(|c| c.scale(Complex64::new(0.0, -3.0))).collect(),
            Flavor::Harmonic,
        )
        .unwrap();
        assert!((sup_vector_amalgam_norm(&scaled, e) - 3.0 * full).abs() < 1e-12 * full);
        let only = field.scale_component(1, Complex64::new(0.0, 0.0)).unwrap();
        assert!((sup_vector_amalgam_norm(&only, e) - last).abs() < 1e-12 * last);
    }
}
