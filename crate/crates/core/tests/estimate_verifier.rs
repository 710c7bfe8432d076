mod common;

use plap_core::exact::{Counterexample, ExactSolution, Heat};
use plap_core::grid::{integrate_with, Cylinder, JetField, ScalarField, SpaceTimeGrid};
use plap_core::jet::{d_vs_matrix, Params};
use plap_core::solver::{solve, Scheme, SolverConfig};
use plap_core::verify::{
    caccioppoli_report, pointwise_suite, sharpness_sweep, sweep_integral, testfn_estimate_report,
    AxisBand, Classification,
};
use proptest::prelude::*;

fn sampled_counterexample(p: f64, nx: usize) -> ScalarField {
    let ce = Counterexample::new(p).unwrap();
    let grid = SpaceTimeGrid::square(-1.0, 1.0, nx, 0.0, 1.4, 57).unwrap();
    ScalarField::from_fn(grid, |x, t| ce.value(x, t)).unwrap()
}

fn solved_heat(nx: usize) -> ScalarField {
    let grid = SpaceTimeGrid::square(0.0, 1.0, nx, 0.0, 0.2, 41).unwrap();
    let config = SolverConfig::new(Params::new(2.0, 0.0, 0.0).unwrap(), grid, Scheme::ImplicitPicard);
    solve(&config, &Heat).unwrap().field
}

#[test]
fn counterexample_lhs_matches_reduced_oracle() {
    let params = Params::new(3.0, 0.5, 0.0).unwrap();
    let u = sampled_counterexample(3.0, 128);
    let cyl = Cylinder::new(&[0.0, 0.0], 0.7, 0.4).unwrap();
    let report = caccioppoli_report(&u, &params, &cyl).unwrap();
    let oracle = common::counterexample_cylinder_integral(3.0, 0.5, 0.4);
    assert!((report.lhs - oracle).abs() / oracle < 0.05, "{} vs {oracle}", report.lhs);
    assert_eq!(report.flags.singular_nodes_skipped, 0);
}

#[test]
fn weighted_lhs_bounded_by_unweighted_outer_integral() {
    let params = Params::new(2.0, 0.0, 0.0).unwrap();
    let u = solved_heat(48);
    let cyl = Cylinder::new(&[0.5, 0.5], 0.1, 0.12).unwrap();
    let weighted = testfn_estimate_report(&u, &params, &cyl).unwrap();
    let jets = JetField::from_field(&u);
    let outer = integrate_with(u.grid(), &cyl.scaled(2.0), |k, idx| {
        d_vs_matrix(&jets.jet(k, idx), &params).unwrap().norm_squared()
    });
    assert!(weighted.lhs <= outer.value);
    assert!(weighted.is_consistent() && weighted.empirical_constant.is_finite());
}

#[test]
fn testfn_constant_stable_under_refinement() {
    let params = Params::new(2.0, 0.0, 0.0).unwrap();
    let cyl = Cylinder::new(&[0.5, 0.5], 0.1, 0.12).unwrap();
    let a = testfn_estimate_report(&solved_heat(32), &params, &cyl).unwrap().empirical_constant;
    let b = testfn_estimate_report(&solved_heat(64), &params, &cyl).unwrap().empirical_constant;
    assert!(a.max(b) / a.min(b) < 2.0, "{a} {b}");
}

#[test]
fn pointwise_suites_on_fields() {
    let heat = solved_heat(32);
    let summary = pointwise_suite(&heat, &Params::new(2.0, 0.5, 1e-3).unwrap(), None);
    assert!(summary.nodes_checked > 0);
    assert!(summary.min_normalized() >= -1e-9, "{summary:?}");

    // one-directional jets: equality in the fundamental inequality
    let u = sampled_counterexample(3.0, 32);
    let band = AxisBand { axis: 0, center: 0.0, half_width: 0.1 };
    let summary = pointwise_suite(&u, &Params::new(3.0, 0.0, 0.0).unwrap(), Some(band));
    assert!(summary.nodes_excluded > 0);
    let fundamental = summary.margin("fundamental").unwrap();
    assert!(fundamental.min_raw.abs() < 1e-9 && fundamental.min_normalized.abs() < 1e-12);
}

#[test]
fn sweep_cases() {
    let table = sharpness_sweep(3.0, &[-1.0, -0.5, 0.0], &[32, 64, 128, 256, 512]).unwrap();
    let divergent = table.verdict(-1.0).unwrap();
    assert_eq!(divergent.classification, Classification::Divergent);
    assert!(divergent.increment_ratios.iter().all(|r| *r >= 0.8));
    for s in [-0.5, 0.0] {
        assert_eq!(table.verdict(s).unwrap().classification, Classification::Convergent);
        let finest = table.rows.iter().rfind(|r| r.s == s).unwrap().lhs;
        let oracle = common::counterexample_cylinder_integral(3.0, s, table.r);
        assert!((finest - oracle).abs() / oracle < 0.02);
    }
    assert!(table.matches_threshold());
    assert!(sharpness_sweep(3.0, &[0.0], &[64, 32]).is_err());
    let ce = Counterexample::new(3.0).unwrap();
    assert!(sweep_integral(&ce, &Params::new(3.0, 0.0, 0.0).unwrap(), 31, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lhs_non_decreasing_in_radius(r1 in 0.05..0.2f64, dr in 0.0..0.2f64, s in -0.5..1.0f64) {
        let u = sampled_counterexample(3.0, 32);
        let params = Params::new(3.0, s, 0.0).unwrap();
        let small = caccioppoli_report(&u, &params, &Cylinder::new(&[0.0, 0.0], 0.7, r1).unwrap()).unwrap();
        let large = caccioppoli_report(&u, &params, &Cylinder::new(&[0.0, 0.0], 0.7, r1 + dr).unwrap()).unwrap();
        prop_assert!(small.lhs <= large.lhs);
        prop_assert!(small.is_consistent() && large.is_consistent());
    }
}
