//! End-to-end use of the public API on reduced grids.

use hardy_amalgam::hardy::{check_atom, grid_key, reference_family, FrozenKey, FrozenStore, ATOM_SIDES};
use hardy_amalgam::*;

fn line() -> GridSpec {
    make_grid(1, 8.0, 512).unwrap()
}

fn times() -> TimeGrid {
    TimeGrid::log_spaced(1e-3, 16.0, 24).unwrap()
}

#[test]
fn indicator_norm_matches_hand_value() {
    let f = sample(&FunctionSpec::Indicator { lower: vec![0.0], upper: vec![2.0] }, line()).unwrap();
    // Two unit cubes of mass 1 each: (1 + 1)^{1/2}.
    let v = amalgam_norm(&f, Exponents::new(1.0, 2.0).unwrap(), Window::Discrete).unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-14, "{v}");
}

#[test]
fn lifts_satisfy_their_cauchy_riemann_systems() {
    let f = sample(&FunctionSpec::BandLimited { seed: 7, low: 0.125, high: 0.5 }, line()).unwrap();
    let tg = times();
    let h = harmonic_cr_residual(&harmonic_lift(&f, &tg).unwrap()).unwrap();
    assert!(h.sym_res.max(h.div_res) < 1e-8, "{h:?}");
    let c = caloric_cr_residual(&caloric_lift(&f, &tg).unwrap(), HalfDerivativeMode::Spectral).unwrap();
    assert!(c.a_res.max(c.b_res).max(c.c_res) < 1e-8);
}

#[test]
fn extensions_recover_smooth_data_at_small_times() {
    let f = sample(&FunctionSpec::Gaussian { center: vec![0.5], width: 1.0 }, line()).unwrap();
    for kernel in [KernelTag::Poisson, KernelTag::Heat] {
        let u = extend(&f, kernel, &times()).unwrap();
        assert!(u.slice(0).relative_l2(&f).unwrap() < 1e-2, "{kernel:?}");
    }
}

#[test]
fn atoms_pass_their_own_checks() {
    let spec = line();
    let e = Exponents::new(1.0, 1.0).unwrap();
    for order in [0, 1] {
        for side in ATOM_SIDES {
            let a = AtomSpec { corner: vec![0.0], side, order, exponents: e };
            let check = check_atom(&make_atom(&a, spec).unwrap(), &a, 1e-10).unwrap();
            assert!(check.ok, "side {side} order {order}: {check:?}");
        }
    }
}

#[test]
fn equivalence_report_records_spreads_and_frozen_comparisons() {
    let spec = line();
    let tg = times();
    let family = reference_family(spec).unwrap();
    let e = Exponents::new(1.0, 1.0).unwrap();
    let methods = [Method::Maximal, Method::Riesz(1)];
    let report = equivalence_report(&family, e, &methods, &tg, None).unwrap();
    assert_eq!(report.comparisons.len(), 1);
    let spread = report.comparisons[0].observed;
    assert!(spread >= 1.0 && spread.is_finite());
    // Without a store there is nothing to compare against.
    assert_eq!(report.comparisons[0].pass, None);

    let mut store = FrozenStore::new();
    store.insert(FrozenKey::new(&family.id, "maximal~riesz1", e, &grid_key(&spec, &tg)), spread);
    let again = equivalence_report(&family, e, &methods, &tg, Some(&store)).unwrap();
    assert_eq!(again.comparisons[0].pass, Some(true), "{:?}", again.comparisons[0]);
    let reparsed = FrozenStore::parse(&store.render()).unwrap();
    assert_eq!(reparsed, store);
}
