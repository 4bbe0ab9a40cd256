//! Randomized invariants of the norms and operators on small grids.

use hardy_amalgam::grid::io;
use hardy_amalgam::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn small() -> GridSpec {
    make_grid(1, 4.0, 64).unwrap()
}

fn function(values: Vec<(f64, f64)>) -> GridFunction {
    GridFunction::new(small(), values.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
}

fn samples() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 64)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 0.5f64..6.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn amalgam_norm_is_homogeneous(v in samples(), p in exponent(), q in exponent(), c in -5.0f64..5.0) {
        let f = function(v);
        let e = Exponents::new(p, q).unwrap();
        let base = amalgam_norm(&f, e, Window::Discrete).unwrap();
        let scaled = amalgam_norm(&f.scale_real(c), e, Window::Discrete).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + base * c.abs()));
    }

    #[test]
    fn amalgam_norm_obeys_triangle_inequality(a in samples(), b in samples(), p in 1.0f64..5.0, q in 1.0f64..5.0) {
        let (f, g) = (function(a), function(b));
        let e = Exponents::new(p, q).unwrap();
        let sum = amalgam_norm(&f.add(&g).unwrap(), e, Window::Discrete).unwrap();
        let parts = amalgam_norm(&f, e, Window::Discrete).unwrap() + amalgam_norm(&g, e, Window::Discrete).unwrap();
        prop_assert!(sum <= parts * (1.0 + 1e-12));
    }

    #[test]
    fn equal_exponents_collapse_to_lebesgue(v in samples(), p in exponent()) {
        let f = function(v);
        let a = amalgam_norm(&f, Exponents::new(p, p).unwrap(), Window::Discrete).unwrap();
        let b = lp_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn holder_pairing_is_bounded(a in samples(), b in samples(), p in 1.0f64..6.0, q in 1.0f64..6.0) {
        let gap = holder_gap(&function(a), &function(b), Exponents::new(p, q).unwrap()).unwrap();
        prop_assert!(gap.rhs - gap.lhs >= -1e-10 * gap.rhs.max(1.0));
    }

    #[test]
    fn riesz_transform_is_an_isometry_on_mean_free_data(v in samples()) {
        let f = function(v).remove_mean();
        let r = riesz(&f, 1).unwrap();
        prop_assert!((r.l2_norm() - f.l2_norm()).abs() <= 1e-10 * f.l2_norm().max(1e-300));
    }

    #[test]
    fn convolution_commutes(a in samples(), b in samples()) {
        let (f, g) = (function(a), function(b));
        let fg = convolve(&f, &g).unwrap();
        let gf = convolve(&g, &f).unwrap();
        prop_assert!(fg.relative_l2(&gf).unwrap() <= 1e-12);
    }

    #[test]
    fn binary_dump_round_trips(v in samples()) {
        let f = function(v);
        let back = io::decode(&io::encode(&f, &[])).unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn maximal_hardy_norm_is_homogeneous(v in samples(), c in 0.1f64..10.0) {
        let f = function(v);
        let tg = TimeGrid::log_spaced(1e-2, 4.0, 8).unwrap();
        let e = Exponents::new(1.0, 2.0).unwrap();
        let base = hardy_norm_maximal(&f, e, &tg).unwrap();
        let scaled = hardy_norm_maximal(&f.scale_real(c), e, &tg).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-10 * c * base);
    }
}
