use num_complex::Complex64;
use proptest::prelude::*;

use su11_lacunary::lab::{generate_coefficients, trend_check, CoefficientSpec};
use su11_lacunary::metric::{c_p, cauchy_bound_checks, d_p_between, pointwise_distance};
use su11_lacunary::product::{centered_identity, energy_identity, partial_product, pointwise_product};
use su11_lacunary::repr::odd_block_values;
use su11_lacunary::su11::rho;
use su11_lacunary::{CoefficientSequence, LacunarySequence, Su11Matrix, Tolerances, TorusGrid};

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

fn instance(max_n: usize) -> impl Strategy<Value = (f64, Vec<Complex64>)> {
    (prop_oneof![Just(2.0), Just(3.0), Just(3.5)], prop::collection::vec(disk_point(), 0..=max_n))
}

fn group_element() -> impl Strategy<Value = Su11Matrix> {
    (disk_point(), 0.0..1.0f64, 1..40i64).prop_map(|(f, t, m)| {
        let c = CoefficientSequence::from_f([f]).unwrap();
        c.get(1).unwrap().factor_at(m, t)
    })
}

fn setup(q: f64, fs: &[Complex64]) -> (CoefficientSequence, LacunarySequence) {
    (
        CoefficientSequence::from_f(fs.iter().copied()).unwrap(),
        LacunarySequence::geometric_ceil(q, fs.len().max(1)).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_identities_hold((q, fs) in instance(10)) {
        let tol = Tolerances::default();
        let (c, m) = setup(q, &fs);
        let pair = partial_product(&c, &m, 0, fs.len(), &tol).unwrap();
        prop_assert!(energy_identity(&pair, &c).unwrap().holds(1e-10));
        prop_assert!(centered_identity(&pair, &c).unwrap().holds(1e-10));
    }

    #[test]
    fn expansion_matches_matrix_product((q, fs) in instance(9), t in 0.0..1.0f64) {
        let tol = Tolerances::default();
        let (c, m) = setup(q, &fs);
        let pair = partial_product(&c, &m, 0, fs.len(), &tol).unwrap();
        let direct = pointwise_product(&c, &m, 0, fs.len(), t).unwrap();
        let g = pair.evaluate(t);
        let scale = 1.0 + direct.a.norm();
        prop_assert!((g.a - direct.a).norm() <= 1e-11 * scale);
        prop_assert!((g.b - direct.b).norm() <= 1e-11 * scale);
        prop_assert!(g.membership_defect() <= 1e-9 * scale * scale);
    }

    #[test]
    fn windows_compose((q, fs) in instance(10), split in 0usize..=10) {
        let tol = Tolerances::default();
        let (c, m) = setup(q, &fs);
        let n = fs.len();
        let k = split.min(n);
        let whole = partial_product(&c, &m, 0, n, &tol).unwrap();
        let left = partial_product(&c, &m, 0, k, &tol).unwrap();
        let right = partial_product(&c, &m, k, n, &tol).unwrap();
        let joined = left.compose(&right).unwrap();
        let diff = whole.a.sub(&joined.a).l2_norm_sq() + whole.b.sub(&joined.b).l2_norm_sq();
        prop_assert!(diff.sqrt() <= 1e-11 * (1.0 + whole.a.l2_norm_sq()).sqrt());
    }

    #[test]
    fn b_lives_on_odd_blocks((q, fs) in instance(8)) {
        let tol = Tolerances::default();
        let (c, m) = setup(q, &fs);
        let pair = partial_product(&c, &m, 0, fs.len(), &tol).unwrap();
        let blocks = odd_block_values(&m, 0, fs.len()).unwrap();
        for &(k, _) in pair.b.terms() {
            prop_assert!(blocks.contains(&k), "frequency {} of b", k);
        }
    }

    #[test]
    fn autocorrelation_is_modulus_squared(fs in prop::collection::vec(disk_point(), 1..8), t in 0.0..1.0f64) {
        let tol = Tolerances::default();
        let (c, m) = setup(2.0, &fs);
        let pair = partial_product(&c, &m, 0, fs.len(), &tol).unwrap();
        let r = pair.b.autocorrelation().unwrap();
        let direct = pair.b.evaluate(-t).norm_sqr();
        prop_assert!((r.evaluate(t).re - direct).abs() <= 1e-10 * (1.0 + direct));
        let energy = pair.b.autocorrelation_energy().unwrap();
        prop_assert!((energy - r.l2_norm_sq()).abs() <= 1e-10 * (1.0 + energy));
    }

    #[test]
    fn rho_is_a_left_invariant_metric(g1 in group_element(), g2 in group_element(), h in group_element()) {
        let tol = Tolerances::default();
        let d12 = pointwise_distance(&g1, &g2, &tol).unwrap();
        let d21 = pointwise_distance(&g2, &g1, &tol).unwrap();
        prop_assert!(d12 >= 0.0);
        prop_assert!((d12 - d21).abs() <= 1e-9 * (1.0 + d12));
        let shifted = rho(&h.mul(&g1), &h.mul(&g2)).value();
        prop_assert!((shifted - d12).abs() <= 1e-8 * (1.0 + d12));
        prop_assert!(pointwise_distance(&g1, &g1, &tol).unwrap() <= 1e-12);
    }

    #[test]
    fn rho_triangle_inequality(g1 in group_element(), g2 in group_element(), g3 in group_element()) {
        let tol = Tolerances::default();
        let d = |x: &Su11Matrix, y: &Su11Matrix| pointwise_distance(x, y, &tol).unwrap();
        prop_assert!(d(&g1, &g3) <= d(&g1, &g2) + d(&g2, &g3) + 1e-10);
    }

    #[test]
    fn window_distance_obeys_cp_bound((q, fs) in instance(7)) {
        prop_assume!(!fs.is_empty());
        let tol = Tolerances::default();
        let (c, m) = setup(q, &fs);
        let checks = cauchy_bound_checks(&c, &m, 0, fs.len(), &[2.5, 3.0, 4.0], None, &tol).unwrap();
        for check in checks {
            prop_assert!(check.ok, "{} > {}", check.lhs, check.rhs);
        }
    }
}

#[test]
fn d_p_vanishes_only_between_equal_products() {
    let tol = Tolerances::default();
    let (c, m) = setup(3.0, &[Complex64::new(0.4, 0.1); 5]);
    let full = partial_product(&c, &m, 0, 5, &tol).unwrap();
    let shorter = partial_product(&c, &m, 0, 4, &tol).unwrap();
    let grid = TorusGrid::minimal_for(full.max_abs_frequency());
    assert!(d_p_between(&full, &full, 1.0, &grid, &tol).unwrap().value < 1e-12);
    assert!(d_p_between(&full, &shorter, 1.0, &grid, &tol).unwrap().value > 1e-2);
}

#[test]
fn cp_is_deterministic_and_rejects_small_p() {
    assert_eq!(c_p(3.0, 1e-10).unwrap(), c_p(3.0, 1e-10).unwrap());
    assert!(c_p(2.0, 1e-10).is_err());
    assert!(c_p(1.5, 1e-10).is_err());
}

#[test]
fn l2_flag_agrees_with_trend() {
    let cases = [
        (CoefficientSpec::random_phase(true, 0.5, 0.75, 1), true),
        (CoefficientSpec::random_phase(true, 0.5, 1.5, 2), true),
        (CoefficientSpec::random_phase(false, 0.5, 0.5, 3), false),
        (CoefficientSpec::random_phase(false, 0.5, 0.25, 4), false),
        (CoefficientSpec::geometric_decay(0.5, 0.25), true),
        (CoefficientSpec::constant(0.3), false),
    ];
    for (spec, l2) in cases {
        assert_eq!(spec.is_l2(), l2, "{spec:?}");
        assert_eq!(trend_check(&spec).unwrap().bounded, l2, "{spec:?}");
    }
}

#[test]
fn seeded_coefficients_are_reproducible() {
    let spec = CoefficientSpec::random_phase(false, 0.4, 0.3, 99);
    let a = generate_coefficients(&spec, 20).unwrap();
    let b = generate_coefficients(&spec, 20).unwrap();
    assert_eq!(a.coefficients, b.coefficients);
    let other = generate_coefficients(&CoefficientSpec { seed: 100, ..spec }, 20).unwrap();
    assert_ne!(a.coefficients, other.coefficients);
}
