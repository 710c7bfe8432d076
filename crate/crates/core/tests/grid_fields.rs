mod common;

use plap_core::grid::{
    check_cutoff, gradient, hessian, integrate, make_cutoff, Cylinder, ScalarField, SpaceTimeGrid,
};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stencils_exact_on_quadratics(
        nx in 8usize..24,
        lo in -2.0..0.0f64,
        width in 0.5..3.0f64,
        c in prop::collection::vec(-3.0..3.0f64, 6),
    ) {
        let grid = SpaceTimeGrid::square(lo, lo + width, nx, 0.0, 1.0, 3).unwrap();
        let q = |x: &[f64], _t: f64| {
            c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1]
        };
        let u = ScalarField::from_fn(grid.clone(), q).unwrap();
        let g = gradient(&u);
        let h = hessian(&u);
        let exact_h = [2.0 * c[3], c[4], c[4], 2.0 * c[5]];
        for idx in 0..grid.nodes_per_level() {
            let x = grid.position(idx);
            let exact_g = [c[1] + 2.0 * c[3] * x[0] + c[4] * x[1], c[2] + c[4] * x[0] + 2.0 * c[5] * x[1]];
            for (a, b) in g.at(1, idx).iter().zip(exact_g) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            for (a, b) in h.at(1, idx).iter().zip(exact_h) {
                prop_assert!((a - b).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn generated_cutoffs_are_admissible(
        x0 in prop::collection::vec(-0.2..0.2f64, 2),
        r in 0.1..0.3f64,
        t0 in 0.4..0.6f64,
        nx in prop::sample::select(vec![32usize, 48, 64]),
    ) {
        let grid = SpaceTimeGrid::square(-1.0, 1.0, nx, 0.0, 1.0, 41).unwrap();
        let cyl = Cylinder::new(&x0, t0, r).unwrap();
        let phi = make_cutoff(&grid, &cyl).unwrap();
        let check = check_cutoff(&phi, &cyl);
        prop_assert!(check.admissible(r), "{:?}", check);
    }
}

#[test]
fn cutoff_bounds_on_fine_grid() {
    let grid = SpaceTimeGrid::square(-1.0, 1.0, 128, 0.0, 1.0, 65).unwrap();
    let cyl = Cylinder::new(&[0.0, 0.0], 0.5, 0.2).unwrap();
    let check = check_cutoff(&make_cutoff(&grid, &cyl).unwrap(), &cyl);
    assert!(check.max_grad <= 10.0 / 0.2);
    assert!(check.max_time_slope <= 10.0 / 0.04);
    assert!(check.admissible(0.2));
}

#[test]
fn cylinder_volume_within_two_percent() {
    let r = 0.3;
    let cyl = Cylinder::new(&[0.0, 0.0], 0.5, r).unwrap();
    let grid = SpaceTimeGrid::square(-1.0, 1.0, 128, 0.0, 1.0, 129).unwrap();
    let one = ScalarField::from_fn(grid, |_, _| 1.0).unwrap();
    let value = integrate(&one, &cyl).value;
    let exact = PI * r * r * 2.0 * r * r;
    assert!((value - exact).abs() / exact < 0.02, "{value} vs {exact}");
}

fn smooth_integral(nx: usize) -> f64 {
    let grid = SpaceTimeGrid::square(-1.0, 1.0, nx, 0.0, 1.0, 2 * nx + 1).unwrap();
    let u = ScalarField::from_fn(grid, |x, t| (x[0] + 0.5 * x[1]).cos() * (1.0 + t)).unwrap();
    integrate(&u, &Cylinder::new(&[0.1, -0.2], 0.5, 0.5).unwrap()).value
}

#[test]
fn smooth_quadrature_converges_to_oracle() {
    // ∫_{B_r(x0)} cos(x1 + x2/2) dx in polar coordinates, times ∫ (1 + t) over the time window
    let (x0, r, t0) = ([0.1, -0.2], 0.5, 0.5);
    let angular = |rho: f64| {
        let f = |theta: f64| {
            let x = x0[0] + rho * theta.cos();
            let y = x0[1] + rho * theta.sin();
            (x + 0.5 * y).cos() * rho
        };
        common::adaptive_simpson(&f, 0.0, 2.0 * PI, 1e-12)
    };
    let space = common::adaptive_simpson(&angular, 0.0, r, 1e-11);
    let time = 2.0 * r * r * (1.0 + t0);
    let oracle = space * time;
    let errors: Vec<f64> = [32, 64, 128].iter().map(|&nx| (smooth_integral(nx) - oracle).abs()).collect();
    assert!(errors[2] < 0.02 * oracle.abs());
    // first order in h or better on average across two refinements
    assert!(errors[0] / errors[2] >= 3.0, "{errors:?}");
}

#[test]
fn singular_integrand_error_decreases() {
    // |x1|^{-3/4} on Q_r(0, t0): the masked midpoint rule converges like h^{1/4}
    let r: f64 = 0.5;
    let oracle = {
        let f = |v: f64| 8.0 * v.powf(1.0) * 2.0 * (1.0 - v.powi(16)).max(0.0).sqrt();
        // x1 = r v^8: |x1|^{-3/4} dx1 = r^{1/4} 8 v dv
        2.0 * r.powf(0.25) * r * common::adaptive_simpson(&f, 0.0, 1.0, 1e-12) * 2.0 * r * r
    };
    let errors: Vec<f64> = [32usize, 128, 512]
        .iter()
        .map(|&nx| {
            let grid = SpaceTimeGrid::square(-r, r, nx, 0.0, 1.0, 3).unwrap();
            let u = ScalarField::from_fn(grid, |x, _| x[0].abs().powf(-0.75)).unwrap();
            let value = integrate(&u, &Cylinder::new(&[0.0, 0.0], 0.5, r).unwrap()).value;
            (value - oracle).abs() / oracle
        })
        .collect();
    // each 4x refinement gains about a factor 4^{1/4}
    assert!(errors[0] / errors[1] > 1.25 && errors[1] / errors[2] > 1.25, "{errors:?}");
}
