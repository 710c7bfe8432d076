use plap_core::exact::{Counterexample, ExactSolution, Heat};
use plap_core::grid::{ScalarField, SpaceTimeGrid};
use plap_core::jet::Params;
use plap_core::solver::{solve, FnBoundary, Scheme, SolverConfig};

fn heat_config(nx: usize, nt: usize, scheme: Scheme) -> SolverConfig {
    let grid = SpaceTimeGrid::square(0.0, 1.0, nx, 0.0, 0.05, nt).unwrap();
    SolverConfig::new(Params::new(2.0, 0.0, 0.0).unwrap(), grid, scheme)
}

#[test]
fn constant_boundary_data_gives_constant_solution() {
    for (p, eps) in [(1.5, 1e-2), (2.0, 0.0), (3.0, 0.0), (4.0, 1e-3)] {
        for scheme in [Scheme::Explicit, Scheme::ImplicitPicard] {
            let grid = SpaceTimeGrid::square(-1.0, 1.0, 16, 0.0, 0.02, 5).unwrap();
            let config = SolverConfig::new(Params::new(p, 0.0, eps).unwrap(), grid, scheme);
            let solution = solve(&config, &FnBoundary(|_: &[f64], _: f64| 0.75)).unwrap();
            assert!(solution.field.values().iter().all(|v| *v == 0.75), "p = {p}, {scheme:?}");
        }
    }
}

#[test]
fn heat_error_is_second_order_in_space() {
    let errors: Vec<f64> = [16usize, 32]
        .iter()
        .map(|&nx| {
            let h = 1.0 / nx as f64;
            let dt = h * h / 8.0;
            let nt = (0.05 / dt).round() as usize + 1;
            let grid = SpaceTimeGrid::square(0.0, 1.0, nx, 0.0, (nt - 1) as f64 * dt, nt).unwrap();
            let mut config = SolverConfig::new(Params::new(2.0, 0.0, 0.0).unwrap(), grid.clone(), Scheme::Explicit);
            config.cfl_safety = 0.5;
            let u = solve(&config, &Heat).unwrap().field;
            u.max_abs_diff(&ScalarField::from_fn(grid, |x, t| Heat.value(x, t)).unwrap())
        })
        .collect();
    let ratio = errors[0] / errors[1];
    assert!((3.0..=5.0).contains(&ratio), "{errors:?}");
}

#[test]
fn explicit_and_implicit_agree_to_first_order_in_dt() {
    let nx = 16;
    let reference = solve(&heat_config(nx, 801, Scheme::Explicit), &Heat).unwrap().field;
    let gap = |nt: usize| {
        let implicit = solve(&heat_config(nx, nt, Scheme::ImplicitPicard), &Heat).unwrap().field;
        // compare at the common final time
        let last = |f: &ScalarField| f.level(f.grid().nt() - 1).to_vec();
        last(&implicit)
            .iter()
            .zip(last(&reference))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (gap(11), gap(21));
    assert!(coarse / fine >= 1.7, "{coarse} {fine}");
}

#[test]
fn regularized_solutions_settle_as_eps_decreases() {
    let ce = Counterexample::new(3.0).unwrap();
    let grid = SpaceTimeGrid::square(-1.0, 1.0, 24, 0.0, 0.2, 21).unwrap();
    let run = |eps: f64| {
        let config = SolverConfig::new(Params::new(3.0, 0.0, eps).unwrap(), grid.clone(), Scheme::ImplicitPicard);
        solve(&config, &ce).unwrap().field
    };
    let fields: Vec<ScalarField> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e| run(e)).collect();
    let gaps: Vec<f64> = fields.windows(2).map(|w| w[0].max_abs_diff(&w[1])).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn solver_runs_are_bitwise_reproducible() {
    let ce = Counterexample::new(3.0).unwrap();
    let grid = SpaceTimeGrid::square(-1.0, 1.0, 16, 0.0, 0.1, 11).unwrap();
    let config = SolverConfig::new(Params::new(3.0, 0.0, 1e-3).unwrap(), grid, Scheme::ImplicitPicard);
    let a = solve(&config, &ce).unwrap();
    let b = solve(&config, &ce).unwrap();
    let bits = |f: &ScalarField| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.field), bits(&b.field));
    assert_eq!(a.diagnostics, b.diagnostics);
}

#[test]
fn p2_implicit_uses_single_sweep_and_matches_explicit_as_dt_shrinks() {
    let implicit = solve(&heat_config(16, 401, Scheme::ImplicitPicard), &Heat).unwrap();
    assert!(implicit.diagnostics.iter().all(|d| d.picard_iterations == 1));
    let explicit = solve(&heat_config(16, 401, Scheme::Explicit), &Heat).unwrap();
    assert!(implicit.field.max_abs_diff(&explicit.field) < 1e-3);
}
