//! Named function families used by the equivalence harness.

use super::atoms::{make_atom, AtomSpec, ATOM_SIDES};
use crate::amalgam::Exponents;
use crate::error::{param, Result};
use crate::grid::{sample, FunctionSpec, GridFunction, GridSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which family to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Twenty smooth or compactly supported mean-free functions (see [`reference_family`]).
    Reference,
    /// Atoms on `[0, side)^d` for every admissible side and orders 0 and 1.
    Atoms,
    /// Explicit members.
    Functions { id: String, members: Vec<FunctionSpec> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub name: String,
    pub function: GridFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub id: String,
    pub members: Vec<Member>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn build_family(fs: &FamilySpec, spec: GridSpec, e: Exponents) -> Result<Family> {
    match fs {
        FamilySpec::Reference => reference_family(spec),
        FamilySpec::Atoms => atom_family(spec, e),
        FamilySpec::Functions { id, members } => {
            if members.is_empty() {
                return param("members", "empty family");
            }
            let members = members
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    Ok(Member {
                        name: format!("{i}"),
                        function: sample(m, spec)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Family { id: id.clone(), members })
        }
    }
}

/// The reference family:
/// 8 Gaussian differences (shifts `0, +-4, +-16` and widths `0.5, 1, 4`, shifts scaled by `L/32`),
/// 4 atoms (orders 0, 1; sides 1/2, 2), 4 band-limited functions (seeds 1..4,
/// band `[1/8, 1/2]` cycles per unit), and 4 differences of periodized `P_t` or `Q_t`.
/// Every member has its grid mean removed.
pub fn reference_family(spec: GridSpec) -> Result<Family> {
    let d = spec.dim();
    let stretch = spec.l() / 32.0;
    let mut members = Vec::with_capacity(20);
    let mut push = |name: String, f: GridFunction| {
        members.push(Member {
            name,
            function: f.remove_mean(),
        })
    };
    let gaussians = [
        (0.0, 0.5),
        (0.0, 1.0),
        (0.0, 4.0),
        (4.0, 0.5),
        (-4.0, 1.0),
        (-4.0, 4.0),
        (16.0, 0.5),
        (-16.0, 1.0),
    ];
    for (shift, width) in gaussians {
        let center = vec![shift * stretch];
        let f = sample(&FunctionSpec::MeanFreeGaussian { center, width }, spec)?;
        push(format!("gaussian_s{shift}_w{width}"), f);
    }
    let unit = Exponents::new(1.0, 1.0)?;
    for order in [0usize, 1] {
        for side in [0.5, 2.0] {
            let a = AtomSpec {
                corner: vec![0.0; d],
                side,
                order,
                exponents: unit,
            };
            push(format!("atom_m{order}_l{side}"), make_atom(&a, spec)?);
        }
    }
    for seed in 1..=4u64 {
        let f = sample(&FunctionSpec::BandLimited { seed, low: 0.125, high: 0.5 }, spec)?;
        push(format!("band_seed{seed}"), f);
    }
    let one = Complex64::new(1.0, 0.0);
    let pairs = [(0.5, 1.0), (1.0, 2.0)];
    for conjugate in [false, true] {
        for (t1, t2) in pairs {
            let kernel = |t: f64| {
                if conjugate {
                    FunctionSpec::ConjugatePoisson { t, axis: 1, periodic: true }
                } else {
                    FunctionSpec::PoissonKernel { t, periodic: true }
                }
            };
            let a = sample(&kernel(t1), spec)?;
            let b = sample(&kernel(t2), spec)?;
            let tag = if conjugate { "q" } else { "p" };
            push(format!("{tag}{t1}_minus_{tag}{t2}"), a.combine(one, &b, -one)?);
        }
    }
    Ok(Family {
        id: "reference".into(),
        members,
    })
}

/// Atoms with corner at the origin over all admissible sides and orders 0, 1.
pub fn atom_family(spec: GridSpec, e: Exponents) -> Result<Family> {
    let mut members = Vec::new();
    for order in [0usize, 1] {
        for side in ATOM_SIDES {
            let a = AtomSpec {
                corner: vec![0.0; spec.dim()],
                side,
                order,
                exponents: e,
            };
            members.push(Member {
                name: format!("atom_m{order}_l{side}"),
                function: make_atom(&a, spec)?,
            });
        }
    }
    Ok(Family {
        id: "atoms".into(),
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn reference_family_shape() {
        for spec in [make_grid(1, 32.0, 1024).unwrap(), make_grid(2, 8.0, 128).unwrap()] {
            let fam = reference_family(spec).unwrap();
            assert_eq!(fam.len(), 20);
            for m in &fam.members {
                assert!(m.function.mean().norm() < 1e-14, "{}", m.name);
                assert!(m.function.max_abs() > 0.0, "{}", m.name);
                assert!(m.function.max_imag() < 1e-12, "{}", m.name);
            }
        }
    }

    #[test]
    fn atom_family_has_ten_members() {
        let spec = make_grid(1, 8.0, 256).unwrap();
        let fam = atom_family(spec, Exponents::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(fam.len(), 10);
    }
}
