//! Atoms: functions supported in a cube `Q`, with vanishing moments up to order `m` and
//! `||a||_inf <= ||1_Q||_{p,q}^{-1}`.

use crate::amalgam::{discrete_norm, Exponents};
use crate::error::{param, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::quad::legendre;
use serde::{Deserialize, Serialize};

/// Sides accepted for atom cubes.
pub const ATOM_SIDES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Lower corner of the cube `corner + [0, side)^d`.
    pub corner: Vec<f64>,
    pub side: f64,
    /// Moments of order `0..=order` vanish along every axis.
    pub order: usize,
    pub exponents: Exponents,
}

/// Cube location in node indices: first index per axis and nodes per side.
struct CubeNodes {
    first: [usize; 2],
    count: usize,
}

fn locate(a: &AtomSpec, spec: &GridSpec) -> Result<CubeNodes> {
    let d = spec.dim();
    if a.corner.len() != d {
        return param("corner", format!("expected {d} coordinates, got {}", a.corner.len()));
    }
    if !ATOM_SIDES.contains(&a.side) {
        return param("side", format!("must be one of {ATOM_SIDES:?}, got {}", a.side));
    }
    let h = spec.h();
    let count_f = a.side / h;
    if (count_f - count_f.round()).abs() > 1e-9 || count_f.round() < 1.0 {
        return param("side", format!("side {} is not a whole number of cells (h = {h})", a.side));
    }
    let count = count_f.round() as usize;
    if count < a.order + 2 {
        return param("side", format!("{count} nodes per side cannot carry order {}", a.order));
    }
    let mut first = [0usize; 2];
    for (axis, &c) in a.corner.iter().enumerate() {
        let k = (c + spec.l()) / h;
        if (k - k.round()).abs() > 1e-9 {
            return param("corner", format!("corner {c} is not on a grid node"));
        }
        let k = k.round();
        if k < 0.0 || k as usize + count > spec.n() {
            return param("corner", "cube leaves the box");
        }
        first[axis] = k as usize;
    }
    Ok(CubeNodes { first, count })
}

/// One-axis profile: Legendre `P_{m+1}` on the cube nodes with the discrete monomials of
/// degree `0..=m` projected out.
fn axis_profile(count: usize, order: usize) -> Vec<f64> {
    let mid = (count as f64 - 1.0) / 2.0;
    let z: Vec<f64> = (0..count).map(|k| (k as f64 - mid) / mid.max(0.5)).collect();
    let mut v: Vec<f64> = z.iter().map(|&x| legendre(order + 1, x)).collect();
    // Orthonormal basis of the monomials by modified Gram-Schmidt, run twice.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for deg in 0..=order {
        let mut b: Vec<f64> = z.iter().map(|x| x.powi(deg as i32)).collect();
        for _ in 0..2 {
            for e in &basis {
                let c: f64 = b.iter().zip(e).map(|(x, y)| x * y).sum();
                b.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        b.iter_mut().for_each(|x| *x /= norm);
        basis.push(b);
    }
    for _ in 0..2 {
        for e in &basis {
            let c: f64 = v.iter().zip(e).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
        }
    }
    v
}

/// Sampled indicator of the atom's cube.
pub fn cube_indicator(a: &AtomSpec, spec: GridSpec) -> Result<GridFunction> {
    let cube = locate(a, &spec)?;
    let d = spec.dim();
    let inside = |ix: [usize; 2]| (0..d).all(|ax| ix[ax] >= cube.first[ax] && ix[ax] < cube.first[ax] + cube.count);
    let vals: Vec<f64> = (0..spec.len())
        .map(|i| if inside(spec.unflatten(i)) { 1.0 } else { 0.0 })
        .collect();
    GridFunction::from_real(spec, &vals)
}

/// Tensor-product atom, sup-normalized to exactly `||1_Q||_{p,q}^{-1}`.
pub fn make_atom(a: &AtomSpec, spec: GridSpec) -> Result<GridFunction> {
    let cube = locate(a, &spec)?;
    let d = spec.dim();
    let profile = axis_profile(cube.count, a.order);
    let indicator = cube_indicator(a, spec)?;
    let bound = 1.0 / discrete_norm(&spec, &indicator.abs(), a.exponents);
    let mut vals = vec![0.0; spec.len()];
    for (i, v) in vals.iter_mut().enumerate() {
        let ix = spec.unflatten(i);
        let mut prod = 1.0;
        for ax in 0..d {
            let k = ix[ax] as i64 - cube.first[ax] as i64;
            if k < 0 || k >= cube.count as i64 {
                prod = 0.0;
                break;
            }
            prod *= profile[k as usize];
        }
        *v = prod;
    }
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    vals.iter_mut().for_each(|v| *v *= bound / peak);
    GridFunction::from_real(spec, &vals)
}

/// Which atom conditions a function meets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomCheck {
    /// Largest `|f|` outside the cube.
    pub outside: f64,
    /// Largest `|sum_k f(x_k) x_k^alpha h^d|` over `alpha_j <= order`.
    pub max_moment: f64,
    /// `||f||_inf * ||1_Q||_{p,q}`; at most 1 for an atom.
    pub sup_ratio: f64,
    pub ok: bool,
}

/// Checks support, discrete moments (absolute tolerance `tol`) and the sup bound.
pub fn check_atom(f: &GridFunction, a: &AtomSpec, tol: f64) -> Result<AtomCheck> {
    let spec = *f.spec();
    let indicator = cube_indicator(a, spec)?;
    let d = spec.dim();
    let outside = f
        .values()
        .iter()
        .zip(indicator.values())
        .filter(|(_, m)| m.re == 0.0)
        .fold(0.0f64, |acc, (v, _)| acc.max(v.norm()));
    let hd = spec.cell_volume();
    let mut max_moment = 0.0f64;
    let powers: Vec<[usize; 2]> = if d == 1 {
        (0..=a.order).map(|k| [k, 0]).collect()
    } else {
        (0..=a.order)
            .flat_map(|i| (0..=a.order).map(move |j| [i, j]))
            .collect()
    };
    for alpha in powers {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (i, v) in f.values().iter().enumerate() {
            if indicator.get(i).re == 0.0 {
                continue;
            }
            let x = spec.point(i);
            let mono: f64 = (0..d).map(|ax| x[ax].powi(alpha[ax] as i32)).product();
            acc += v * mono;
        }
        max_moment = max_moment.max(acc.norm() * hd);
    }
    let sup_ratio = f.max_abs() * discrete_norm(&spec, &indicator.abs(), a.exponents);
    let ok = outside == 0.0 && max_moment <= tol && sup_ratio <= 1.0 + 1e-12;
    Ok(AtomCheck {
        outside,
        max_moment,
        sup_ratio,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn atom(corner: Vec<f64>, side: f64, order: usize) -> AtomSpec {
        AtomSpec {
            corner,
            side,
            order,
            exponents: Exponents::new(1.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn haar_pattern_is_an_atom() {
        let spec = make_grid(1, 4.0, 64).unwrap();
        let a = atom(vec![0.0], 1.0, 0);
        let haar = GridFunction::from_real_fn(spec, |x| {
            if (0.0..0.5).contains(&x[0]) {
                1.0
            } else if (0.5..1.0).contains(&x[0]) {
                -1.0
            } else {
                0.0
            }
        });
        let c = check_atom(&haar, &a, 1e-12).unwrap();
        assert!(c.ok, "{c:?}");
        assert!((c.sup_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constructed_atoms_meet_all_conditions() {
        for (d, n) in [(1, 256), (2, 128)] {
            let spec = make_grid(d, 8.0, n).unwrap();
            for order in [0, 1, 2] {
                for side in [0.5, 1.0, 2.0] {
                    for corner in [0.0, -3.0, 2.5] {
                        let a = AtomSpec {
                            corner: vec![corner; d],
                            side,
                            order,
                            exponents: Exponents::new(1.5, 0.8).unwrap(),
                        };
                        let f = make_atom(&a, spec).unwrap();
                        let c = check_atom(&f, &a, 1e-12).unwrap();
                        assert!(c.ok, "d={d} order={order} side={side} corner={corner}: {c:?}");
                        assert!((c.sup_ratio - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn misaligned_or_oversized_cubes_rejected() {
        let spec = make_grid(1, 4.0, 64).unwrap();
        assert!(make_atom(&atom(vec![0.01], 1.0, 0), spec).is_err());
        assert!(make_atom(&atom(vec![3.5], 1.0, 0), spec).is_err());
        assert!(make_atom(&atom(vec![0.0], 3.0, 0), spec).is_err());
        let coarse = make_grid(1, 4.0, 8).unwrap();
        assert!(make_atom(&atom(vec![0.0], 0.25, 0), coarse).is_err());
    }
}
