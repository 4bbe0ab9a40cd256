//! Hardy-space quantities on amalgam spaces: the maximal-function norm, the Riesz and
//! multiplier quantities, the harmonic and caloric lifts, atoms, and the equivalence harness.

mod atoms;
mod equivalence;
mod family;
pub mod frozen;

pub use atoms::{check_atom, cube_indicator, make_atom, AtomCheck, AtomSpec, ATOM_SIDES};
pub use equivalence::{
    atom_band, default_multipliers, equivalence_report, equivalence_reports, freeze_constants,
    grid_key, growth_constant, Comparison, EquivalenceReport, FreezeGrids, MemberValues, Method,
    PairStats, FROZEN_EXPONENTS, FROZEN_SLACK, LEG_EXPONENTS,
};
pub use family::{atom_family, build_family, reference_family, Family, FamilySpec, Member};
pub use frozen::{default_frozen_path, FrozenKey, FrozenStore};

use crate::amalgam::{discrete_norm, Exponents};
use crate::crsys::{ConjugateField, Flavor};
use crate::error::{param, Result};
use crate::extension::{ball_max, extend, radial_maximal, Ball, ExtensionStack, KernelTag, Mollifier, TimeGrid};
use crate::grid::{GridFunction, Spectrum};
use crate::spectral::{apply_multiplier, rank2_check, riesz, riesz_symbol, MultiplierFamily};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// A value together with the reason the theory does not back it, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub warning: Option<String>,
}

/// `|| M_phi f ||_{p,q}` with `phi = W_1` and the sup over `tg`.
pub fn hardy_norm_maximal(f: &GridFunction, e: Exponents, tg: &TimeGrid) -> Result<f64> {
    Ok(maximal_many(f, &[e], tg)?[0])
}

/// [`hardy_norm_maximal`] for several exponent pairs from one maximal function.
pub fn maximal_many(f: &GridFunction, es: &[Exponents], tg: &TimeGrid) -> Result<Vec<f64>> {
    let m = radial_maximal(f, &Mollifier::Heat, tg)?.abs();
    Ok(es.iter().map(|&e| discrete_norm(f.spec(), &m, e)).collect())
}

/// All index sequences `(j_1, ..., j_k)`, `1 <= k <= order`, over axes `1..=dim`.
fn riesz_sequences(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..order {
        layer = layer
            .iter()
            .flat_map(|s| {
                (1..=dim).map(move |j| {
                    let mut t = s.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn riesz_warning(e: Exponents, d: usize, order: usize) -> Option<String> {
    (!e.riesz_threshold_ok(d, order)).then(|| {
        format!(
            "min(p, q) = {} is not above (d-1)/(d+m-1) = {}",
            e.min(),
            (d as f64 - 1.0) / (d as f64 + order as f64 - 1.0)
        )
    })
}

/// `max_eps ( ||f * phi_eps||_{p,q} + sum_{k <= order} sum_{j_1..j_k} ||R_{j_1}..R_{j_k} f * phi_eps||_{p,q} )`
/// with `phi_eps^(xi) = e^{-4 pi^2 eps^2 |xi|^2}`.
///
/// Below `min{p, q} > (d - 1)/(d + order - 1)` the value is still computed and flagged.
pub fn hardy_quantity_riesz(
    f: &GridFunction,
    e: Exponents,
    eps: &TimeGrid,
    order: usize,
) -> Result<Quantity> {
    Ok(riesz_many(f, &[e], eps, order)?.remove(0))
}

/// [`hardy_quantity_riesz`] for several exponent pairs.
pub fn riesz_many(
    f: &GridFunction,
    es: &[Exponents],
    eps: &TimeGrid,
    order: usize,
) -> Result<Vec<Quantity>> {
    if order == 0 {
        return param("order", "Riesz order must be at least 1");
    }
    let spec = *f.spec();
    let d = spec.dim();
    let sequences = riesz_sequences(d, order);
    let spectrum = Spectrum::of(f);
    let per_eps: Vec<Vec<f64>> = eps
        .values()
        .par_iter()
        .map(|&s| {
            let mollify =
                |xi: [f64; 2]| (-4.0 * PI * PI * s * s * (xi[0] * xi[0] + xi[1] * xi[1])).exp();
            let base = spectrum.apply(|xi| Complex64::new(mollify(xi), 0.0)).abs();
            let mut total: Vec<f64> = es.iter().map(|&e| discrete_norm(&spec, &base, e)).collect();
            for seq in &sequences {
                let g = spectrum
                    .apply(|xi| {
                        seq.iter().fold(Complex64::new(mollify(xi), 0.0), |acc, &j| {
                            acc * riesz_symbol(xi, j)
                        })
                    })
                    .abs();
                for (t, &e) in total.iter_mut().zip(es) {
                    *t += discrete_norm(&spec, &g, e);
                }
            }
            total
        })
        .collect();
    Ok(es
        .iter()
        .enumerate()
        .map(|(i, &e)| Quantity {
            value: per_eps.iter().map(|v| v[i]).fold(0.0, f64::max),
            warning: riesz_warning(e, d, order),
        })
        .collect())
}

/// `sum_j || m_{theta_j} f ||_{p,q}`.
pub fn hardy_quantity_multiplier(
    f: &GridFunction,
    family: &MultiplierFamily,
    e: Exponents,
) -> Result<Quantity> {
    Ok(multiplier_many(f, family, &[e])?.remove(0))
}

/// [`hardy_quantity_multiplier`] for several exponent pairs.
pub fn multiplier_many(
    f: &GridFunction,
    family: &MultiplierFamily,
    es: &[Exponents],
) -> Result<Vec<Quantity>> {
    let spec = *f.spec();
    let mut warnings = Vec::new();
    let rank = rank2_check(family, 256, 1e-8)?;
    if !rank.ok {
        warnings.push(format!(
            "multiplier family fails the rank-2 condition ({})",
            rank.reason.unwrap_or_default()
        ));
    }
    let mean = f.mean().norm();
    if mean > 1e-12 * f.max_abs().max(f64::MIN_POSITIVE) {
        warnings.push(format!(
            "input has nonzero mean {mean:e}; the DC term follows each symbol's value at 0"
        ));
    }
    let mut values = vec![0.0; es.len()];
    for theta in family.symbols() {
        let g = apply_multiplier(f, theta)?.abs();
        for (v, &e) in values.iter_mut().zip(es) {
            *v += discrete_norm(&spec, &g, e);
        }
    }
    let warning = (!warnings.is_empty()).then(|| warnings.join("; "));
    Ok(values
        .into_iter()
        .map(|value| Quantity {
            value,
            warning: warning.clone(),
        })
        .collect())
}

/// `|| u* ||_{p,q}` for the Poisson extension `u = f * P_t` over `tg`.
pub fn nontangential_quantity(
    f: &GridFunction,
    e: Exponents,
    tg: &TimeGrid,
    aperture: f64,
) -> Result<f64> {
    Ok(nontangential_many(f, &[e], tg, aperture)?[0])
}

/// [`nontangential_quantity`] for several exponent pairs, slice by slice without storing the stack.
pub fn nontangential_many(
    f: &GridFunction,
    es: &[Exponents],
    tg: &TimeGrid,
    aperture: f64,
) -> Result<Vec<f64>> {
    if !(aperture > 0.0 && aperture.is_finite()) {
        return param("aperture", format!("must be positive, got {aperture}"));
    }
    let spec = *f.spec();
    let spectrum = Spectrum::of(f);
    let star = tg
        .values()
        .par_iter()
        .map(|&t| {
            let u = spectrum
                .apply(|xi| Complex64::new(KernelTag::Poisson.symbol(xi, t).unwrap_or(0.0), 0.0))
                .abs();
            ball_max(&spec, &u, &Ball::open(&spec, aperture * t))
        })
        .reduce(
            || vec![0.0; spec.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x = x.max(y));
                a
            },
        );
    Ok(es.iter().map(|&e| discrete_norm(&spec, &star, e)).collect())
}

/// `max_t || |F(., t)| ||_{p,q}` of the lift with `kernel`, slice by slice without storing stacks.
fn lift_norm_many(f: &GridFunction, es: &[Exponents], tg: &TimeGrid, kernel: KernelTag) -> Result<Vec<f64>> {
    let spec = *f.spec();
    let d = spec.dim();
    let spectrum = Spectrum::of(f);
    let per_t: Vec<Vec<f64>> = tg
        .values()
        .par_iter()
        .map(|&t| {
            let sym = |xi: [f64; 2]| kernel.symbol(xi, t).unwrap_or(0.0);
            let mut sq: Vec<f64> = spectrum
                .apply(|xi| Complex64::new(sym(xi), 0.0))
                .values()
                .iter()
                .map(|v| v.norm_sqr())
                .collect();
            for j in 1..=d {
                let u = spectrum.apply(|xi| riesz_symbol(xi, j) * sym(xi));
                sq.iter_mut().zip(u.values()).for_each(|(s, v)| *s += v.norm_sqr());
            }
            let mag: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
            es.iter().map(|&e| discrete_norm(&spec, &mag, e)).collect()
        })
        .collect();
    Ok((0..es.len())
        .map(|i| per_t.iter().map(|v| v[i]).fold(0.0, f64::max))
        .collect())
}

/// [`caloric_quantity`] for several exponent pairs.
pub fn caloric_many(f: &GridFunction, es: &[Exponents], tg: &TimeGrid) -> Result<Vec<f64>> {
    lift_norm_many(f, es, tg, KernelTag::Heat)
}

/// [`harmonic_quantity`] for several exponent pairs.
pub fn harmonic_many(f: &GridFunction, es: &[Exponents], tg: &TimeGrid) -> Result<Vec<f64>> {
    lift_norm_many(f, es, tg, KernelTag::Poisson)
}

fn lift(f: &GridFunction, tg: &TimeGrid, kernel: KernelTag, flavor: Flavor) -> Result<ConjugateField> {
    let d = f.spec().dim();
    let mut comps = (1..=d)
        .map(|j| extend(&riesz(f, j)?, kernel, tg))
        .collect::<Result<Vec<ExtensionStack>>>()?;
    comps.push(extend(f, kernel, tg)?);
    ConjugateField::new(comps, flavor)
}

/// `F = (R_1 f * P_t, ..., R_d f * P_t, f * P_t)`.
pub fn harmonic_lift(f: &GridFunction, tg: &TimeGrid) -> Result<ConjugateField> {
    lift(f, tg, KernelTag::Poisson, Flavor::Harmonic)
}

/// `F = (R_1 f * W_t, ..., R_d f * W_t, f * W_t)`; `R_j f * W_t = f * S_j(., t)`.
pub fn caloric_lift(f: &GridFunction, tg: &TimeGrid) -> Result<ConjugateField> {
    lift(f, tg, KernelTag::Heat, Flavor::Caloric)
}

/// `sup_t || |F(., t)| ||_{p,q}` of the caloric lift.
pub fn caloric_quantity(f: &GridFunction, e: Exponents, tg: &TimeGrid) -> Result<f64> {
    Ok(caloric_many(f, &[e], tg)?[0])
}

/// `sup_t || |F(., t)| ||_{p,q}` of the harmonic lift.
pub fn harmonic_quantity(f: &GridFunction, e: Exponents, tg: &TimeGrid) -> Result<f64> {
    Ok(harmonic_many(f, &[e], tg)?[0])
}

/// `max_t t^{d/(2 max{p,q})} max_x |u(x, t)| / ||u||_{T^{p,q}}` of a stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRatio {
    pub ratio: f64,
    pub at_time: f64,
}

pub fn growth_ratio(stack: &ExtensionStack, e: Exponents) -> Result<GrowthRatio> {
    let tent = stack.tent_norm(e);
    if tent == 0.0 {
        return Err(crate::error::Error::Numerical("zero stack has no growth ratio".into()));
    }
    let power = stack.spec().dim() as f64 / (2.0 * e.max());
    let mut best = GrowthRatio { ratio: 0.0, at_time: stack.times().t_min() };
    for (s, &t) in stack.slices().iter().zip(stack.times().values()) {
        let r = t.powf(power) * s.max_abs() / tent;
        if r > best.ratio {
            best = GrowthRatio { ratio: r, at_time: t };
        }
    }
    Ok(best)
}

/// Worst excess of `|F(x, t + a)|` over `(P_t * |F(., a)|)(x)` on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Majorization {
    /// `max (|F(x, t + a)| - P_t * |F(., a)|(x))`, clipped below at 0.
    pub max_violation: f64,
    /// `max_x |F(x, a)|`.
    pub peak: f64,
}

/// Subharmonic majorization of the harmonic lift with exponent 1.
pub fn majorization(f: &GridFunction, tg: &TimeGrid, a: f64) -> Result<Majorization> {
    let spec = *f.spec();
    let at_a = harmonic_lift(f, &TimeGrid::from_values(vec![a])?)?;
    let base = GridFunction::from_real(spec, &at_a.magnitude(0))?;
    let peak = base.max_abs();
    let upper = extend(&base, KernelTag::Poisson, tg)?;
    let shifted = harmonic_lift(f, &tg.shifted(a)?)?;
    let max_violation = (0..tg.len())
        .into_par_iter()
        .map(|k| {
            let mag = shifted.magnitude(k);
            mag.iter()
                .zip(upper.slice(k).values())
                .map(|(m, u)| m - u.re)
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(Majorization { max_violation, peak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, FunctionSpec};
    use crate::spectral::SphereSymbol;

    fn setup() -> (GridFunction, TimeGrid) {
        let spec = make_grid(1, 16.0, 512).unwrap();
        let f = sample(&FunctionSpec::MeanFreeGaussian { center: vec![1.0], width: 1.0 }, spec).unwrap();
        (f, TimeGrid::log_spaced(1e-2, 16.0, 16).unwrap())
    }

    #[test]
    fn sequences_enumerate_all_orders() {
        assert_eq!(riesz_sequences(1, 2), vec![vec![1], vec![1, 1]]);
        assert_eq!(riesz_sequences(2, 2).len(), 2 + 4);
    }

    #[test]
    fn homogeneity_and_zero() {
        let (f, tg) = setup();
        let e = Exponents::new(1.0, 1.0).unwrap();
        let c = Complex64::new(0.0, -2.5);
        let fam = MultiplierFamily::identity_and_sign();
        let pairs = [
            (hardy_norm_maximal(&f, e, &tg).unwrap(), hardy_norm_maximal(&f.scale(c), e, &tg).unwrap()),
            (
                hardy_quantity_riesz(&f, e, &tg, 1).unwrap().value,
                hardy_quantity_riesz(&f.scale(c), e, &tg, 1).unwrap().value,
            ),
            (
                hardy_quantity_multiplier(&f, &fam, e).unwrap().value,
                hardy_quantity_multiplier(&f.scale(c), &fam, e).unwrap().value,
            ),
        ];
        for (a, b) in pairs {
            assert!(a > 0.0);
            assert!((b - 2.5 * a).abs() <= 1e-12 * b);
        }
        let z = GridFunction::zeros(*f.spec());
        assert_eq!(hardy_norm_maximal(&z, e, &tg).unwrap(), 0.0);
    }

    #[test]
    fn riesz_quantity_dominates_and_grows_with_order() {
        let (f, tg) = setup();
        let e = Exponents::new(1.0, 1.0).unwrap();
        let q1 = hardy_quantity_riesz(&f, e, &tg, 1).unwrap();
        let q2 = hardy_quantity_riesz(&f, e, &tg, 2).unwrap();
        assert!(q1.warning.is_none());
        assert!(q2.value >= q1.value);
        let spec = *f.spec();
        let first = tg
            .values()
            .iter()
            .map(|&s| {
                let g = Spectrum::of(&f).apply(|xi| Complex64::new((-4.0 * PI * PI * s * s * xi[0] * xi[0]).exp(), 0.0));
                discrete_norm(&spec, &g.abs(), e)
            })
            .fold(0.0, f64::max);
        assert!(q1.value >= first);
    }

    #[test]
    fn multiplier_quantity_semantics() {
        let (f, _) = setup();
        let e = Exponents::new(1.0, 2.0).unwrap();
        let fam = MultiplierFamily::identity_and_sign();
        let q = hardy_quantity_multiplier(&f, &fam, e).unwrap();
        let hilbert = riesz(&f, 1).unwrap();
        let expect = discrete_norm(f.spec(), &f.abs(), e) + discrete_norm(f.spec(), &hilbert.abs(), e);
        assert!((q.value - expect).abs() < 1e-12 * expect);
        let doubled = MultiplierFamily::new(
            fam.symbols().iter().chain(fam.symbols()).cloned().collect(),
        )
        .unwrap();
        let q2 = hardy_quantity_multiplier(&f, &doubled, e).unwrap();
        assert_eq!(q2.value, 2.0 * q.value);
        let lone = MultiplierFamily::new(vec![SphereSymbol::constant(1, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(hardy_quantity_multiplier(&f, &lone, e).unwrap().warning.is_some());
    }

    #[test]
    fn lifts_match_definitions() {
        let (f, tg) = setup();
        let h = harmonic_lift(&f, &tg).unwrap();
        let p = extend(&f, KernelTag::Poisson, &tg).unwrap();
        assert_eq!(h.component(2), &p);
        let hil = extend(&riesz(&f, 1).unwrap(), KernelTag::Poisson, &tg).unwrap();
        for k in 0..tg.len() {
            assert!(h.component(1).slice(k).max_diff(hil.slice(k)).unwrap() < 1e-12);
        }
        let c = caloric_lift(&f, &tg).unwrap();
        let t = tg.values()[3];
        let s1 = crate::kernels::make_periodic_kernel(crate::kernels::KernelKind::CaloricConjugate(1), Some(t), *f.spec()).unwrap();
        let direct = crate::spectral::convolve(&f, &s1).unwrap();
        assert!(c.component(1).slice(3).max_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn majorization_holds_for_harmonic_lift() {
        let (f, tg) = setup();
        let m = majorization(&f, &tg, 1e-2).unwrap();
        assert!(m.max_violation <= 1e-3 * m.peak, "{m:?}");
    }
}
