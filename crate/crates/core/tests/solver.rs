use bernstein_core::constructions::build_wrong_mse_solution;
use bernstein_core::exec::Execution;
use bernstein_core::fields::{catalog, CatalogId, Point2};
use bernstein_core::operators::OperatorParams;
use bernstein_core::solver::{
    residual_grid, residual_grid_with, solve_dirichlet, solve_dirichlet_on, GridFunction, GridSpec,
    InitialGuess, NewtonOptions,
};
use proptest::prelude::*;

fn wrong_mse() -> OperatorParams {
    OperatorParams::new(1.0, 1.0).unwrap()
}

#[test]
fn separable_33_error_is_second_order_sized() {
    let field = build_wrong_mse_solution(1.0).unwrap();
    let exact = |p: Point2| field.value(p).unwrap();
    let grid = GridSpec::square(1.0, 33).unwrap();
    let sol = solve_dirichlet(wrong_mse(), grid, exact, &NewtonOptions::default()).unwrap();
    let h = grid.hx();
    let err = sol.u.max_deviation(exact);
    assert!(err <= 2.0 * h * h, "error {err:e}, h^2 = {:e}", h * h);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_boundary(i, j) {
                assert_eq!(sol.u.at(i, j), exact(grid.point(i, j)));
            }
        }
    }
}

#[test]
fn separable_c2_refinement_ratio() {
    let field = build_wrong_mse_solution(2.0).unwrap();
    let exact = |p: Point2| field.value(p).unwrap();
    let errs: Vec<f64> = [17, 33, 65]
        .iter()
        .map(|&n| {
            let grid = GridSpec::square(1.0, n).unwrap();
            solve_dirichlet(wrong_mse(), grid, exact, &NewtonOptions::default())
                .unwrap()
                .u
                .max_deviation(exact)
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 3.0, "{errs:?}");
    }
}

#[test]
fn sampled_field_residual_shrinks_under_refinement() {
    let field = build_wrong_mse_solution(1.0).unwrap();
    let res: Vec<f64> = [17, 33, 65]
        .iter()
        .map(|&n| {
            let u = GridFunction::from_field(GridSpec::square(1.0, n).unwrap(), &field).unwrap();
            residual_grid(wrong_mse(), &u).max_abs
        })
        .collect();
    assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
    assert!(res[1] / res[2] > 3.0, "{res:?}");
}

#[test]
fn solve_from_boundary_grid_matches_closure() {
    let field = catalog(CatalogId::XPlusH).field;
    let grid = GridSpec::square(0.5, 17).unwrap();
    let data = GridFunction::from_field(grid, &field).unwrap();
    let op = OperatorParams::new(-1.0, 1.0).unwrap();
    let a = solve_dirichlet_on(op, &data, &NewtonOptions::default()).unwrap();
    let b = solve_dirichlet(
        op,
        grid,
        |p| field.value(p).unwrap(),
        &NewtonOptions::default(),
    )
    .unwrap();
    assert_eq!(a.u, b.u);
}

#[test]
fn supplied_guess_length_checked() {
    let grid = GridSpec::square(1.0, 5).unwrap();
    let opts = NewtonOptions {
        initial_guess: InitialGuess::Supplied(vec![0.0; 3]),
        ..Default::default()
    };
    assert!(solve_dirichlet(wrong_mse(), grid, |_| 0.0, &opts).is_err());
}

#[test]
fn independent_solves_run_concurrently() {
    let handles: Vec<_> = [0.5, 1.0, 1.5, 2.0]
        .into_iter()
        .map(|c| {
            std::thread::spawn(move || {
                let field = build_wrong_mse_solution(c).unwrap();
                let grid = GridSpec::square(1.0, 17).unwrap();
                solve_dirichlet(
                    wrong_mse(),
                    grid,
                    |p| field.value(p).unwrap(),
                    &NewtonOptions::default(),
                )
                .unwrap()
                .residual
                .max_abs
            })
        })
        .collect();
    for h in handles {
        assert!(h.join().unwrap() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residual_report_rms_below_max(c in -2.0..2.0f64, n in 3usize..20) {
        let field = build_wrong_mse_solution(c).unwrap();
        let u = GridFunction::from_field(GridSpec::square(1.0, n).unwrap(), &field).unwrap();
        let r = residual_grid(OperatorParams::new(0.5, -0.3).unwrap(), &u);
        prop_assert!(r.rms <= r.max_abs);
    }

    #[test]
    fn stencils_exact_on_quadratics(
        q in prop::array::uniform6(-2.0..2.0f64),
        g in -3.0..3.0f64,
        e in -2.0..2.0f64,
    ) {
        let grid = GridSpec::new(-1.0, 1.5, -0.5, 1.0, 9, 7).unwrap();
        let f = |p: Point2| q[0] * p.x * p.x + q[1] * p.x * p.y + q[2] * p.y * p.y + q[3] * p.x + q[4] * p.y + q[5];
        let u = GridFunction::sample(grid, f);
        let op = OperatorParams::new(g, e).unwrap();
        let r = residual_grid(op, &u);
        // worst node residual against the analytic operator
        let (i, j) = r.worst_node;
        let p = grid.point(i, j);
        let jet = bernstein_core::fields::Jet2::new(
            f(p),
            [2.0 * q[0] * p.x + q[1] * p.y + q[3], q[1] * p.x + 2.0 * q[2] * p.y + q[4]],
            [2.0 * q[0], q[1], 2.0 * q[2]],
        );
        let analytic = bernstein_core::operators::l_residual(op, &jet).abs();
        prop_assert!((r.max_abs - analytic).abs() <= 1e-10 * analytic.max(1.0));
    }

    #[test]
    fn damped_newton_never_increases_residual(c in 0.5..3.0f64, zero_start in any::<bool>()) {
        let field = build_wrong_mse_solution(c).unwrap();
        let grid = GridSpec::square(1.0, 13).unwrap();
        let guess = if zero_start { InitialGuess::Zeros } else { InitialGuess::BoundaryBlend };
        let opts = NewtonOptions { initial_guess: guess, ..Default::default() };
        let sol = solve_dirichlet(wrong_mse(), grid, |p| field.value(p).unwrap(), &opts).unwrap();
        prop_assert!(sol.residual_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn solves_are_bit_identical_across_execution(c in 0.5..2.5f64) {
        let field = build_wrong_mse_solution(c).unwrap();
        let grid = GridSpec::square(1.0, 15).unwrap();
        let run = |exec| {
            let opts = NewtonOptions { exec, ..Default::default() };
            solve_dirichlet(wrong_mse(), grid, |p| field.value(p).unwrap(), &opts).unwrap()
        };
        let (a, b) = (run(Execution::Sequential), run(Execution::Parallel));
        prop_assert_eq!(&a.u, &b.u);
        prop_assert_eq!(a.residual_history, b.residual_history);
        let u = a.u;
        prop_assert_eq!(
            residual_grid_with(Execution::Sequential, wrong_mse(), &u),
            residual_grid_with(Execution::Parallel, wrong_mse(), &u)
        );
    }
}
