use bernstein_core::constructions::{
    build_wrong_mse_solution, monotone_cubic_root, reduce_separable, scale_field, ScalingParams,
    SeparableSolution,
};
use bernstein_core::exec::Execution;
use bernstein_core::fields::{catalog, fd_jet, CatalogId, Jet2, Point2};
use bernstein_core::operators::{
    ellipticity, l_magnitude, l_residual, l_residual_compact, l_residuals_at, OperatorParams,
    ELLIPTICITY_RULE,
};
use bernstein_core::quadrature::Quadrature;
use bernstein_core::variational::{density, el_residual, lambda_value};
use proptest::prelude::*;

fn jet() -> impl Strategy<Value = Jet2> {
    (
        -5.0..5.0f64,
        prop::array::uniform2(-3.0..3.0f64),
        prop::array::uniform3(-5.0..5.0f64),
    )
        .prop_map(|(v, g, h)| Jet2::new(v, g, h))
}

fn op() -> impl Strategy<Value = OperatorParams> {
    (-4.0..4.0f64, -2.0..2.0f64).prop_map(|(g, e)| OperatorParams::new(g, e).unwrap())
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale).max(1e-300)
}

proptest! {
    #[test]
    fn compact_and_expanded_agree(p in op(), j in jet()) {
        let a = l_residual(p, &j);
        let b = l_residual_compact(p, &j);
        prop_assert!(close(a, b, l_magnitude(p, &j), 1e-12), "{a} vs {b}");
    }

    #[test]
    fn discriminant_closed_form(p in op(), ux in -3.0..3.0f64, uy in -3.0..3.0f64) {
        let w = ux * ux + uy * uy;
        let (a, b, c) = p.coefficients(ux, uy);
        let expected = 4.0 * (2.0 * p.epsilon + p.gamma * w).powi(2) - 4.0 * w * w;
        prop_assert!(close(4.0 * a * c - b * b, expected, 4.0 * a.abs() * c.abs() + b * b, 1e-12));
    }

    #[test]
    fn elliptic_rule_implies_positive_discriminant(p in op(), ux in -50.0..50.0f64, uy in -50.0..50.0f64) {
        let rule = p.epsilon * p.gamma > 0.0 && p.gamma.abs() >= 1.0;
        let report = ellipticity(p);
        prop_assert_eq!(report.elliptic, rule);
        prop_assert_eq!(report.rule_source.as_str(), ELLIPTICITY_RULE);
        if rule {
            prop_assert!(p.discriminant(ux, uy) > 0.0);
        }
    }

    #[test]
    fn scaling_identity_on_fields(
        c in 0.2..3.0f64,
        a in prop_oneof![-3.0..-0.3f64, 0.3..3.0f64],
        b in prop_oneof![-2.0..-0.3f64, 0.3..2.0f64],
        x in -2.0..2.0f64,
        y in -2.0..2.0f64,
        g in -3.0..3.0f64,
        e in -2.0..2.0f64,
    ) {
        let s = ScalingParams::new(a, b).unwrap();
        let u = build_wrong_mse_solution(c).unwrap();
        let v = scale_field(u.clone(), s);
        let p = OperatorParams::new(g, e).unwrap();
        let jv = v.jet(Point2::new(x, y)).unwrap();
        let ju = u.jet(Point2::new(b * x, b * y)).unwrap();
        let inner = OperatorParams::new(g, e / s.epsilon_factor()).unwrap();
        let lhs = l_residual(p, &jv);
        let rhs = s.residual_factor() * l_residual(inner, &ju);
        prop_assert!(close(lhs, rhs, l_magnitude(p, &jv), 1e-11), "{lhs} vs {rhs}");
    }

    #[test]
    fn separable_jet_matches_finite_differences(c in -3.0..3.0f64, x in -4.0..4.0f64, y in -4.0..4.0f64) {
        let f = build_wrong_mse_solution(c).unwrap();
        let p = Point2::new(x, y);
        let exact = f.jet(p).unwrap();
        let fd = fd_jet(&f, p, 1e-3).unwrap();
        for (a, b) in [(exact.ux, fd.ux), (exact.uy, fd.uy), (exact.uxx, fd.uxx), (exact.uxy, fd.uxy), (exact.uyy, fd.uyy)] {
            prop_assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn catalog_jets_match_finite_differences(k in 0usize..5, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let f = catalog(CatalogId::ALL[k]).field;
        let p = Point2::new(x, y);
        let exact = f.jet(p).unwrap();
        let fd = fd_jet(&f, p, 1e-3).unwrap();
        for (a, b) in [(exact.value, fd.value), (exact.ux, fd.ux), (exact.uy, fd.uy), (exact.uxx, fd.uxx), (exact.uxy, fd.uxy), (exact.uyy, fd.uyy)] {
            prop_assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn separable_value_is_integral_of_slope(c in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64], x in -5.0..5.0f64) {
        let g = SeparableSolution::new(c).unwrap().g();
        let quad = Quadrature::default().integrate(|t| g.slope(t), 0.0, x).unwrap();
        let value = g.derivatives(x)[0];
        prop_assert!((value - quad.value).abs() <= 1e-9 * value.abs().max(1.0), "{value} vs {}", quad.value);
    }

    #[test]
    fn cubic_root_solves_equation(s in -1e6..1e6f64) {
        let t = monotone_cubic_root(s);
        prop_assert!((t + t * t * t / 3.0 - s).abs() <= 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn separable_ode_holds_for_wrong_mse(c in -3.0..3.0f64, x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let ode = reduce_separable(OperatorParams::new(1.0, 1.0).unwrap());
        let s = SeparableSolution::new(c).unwrap();
        let [_, g1, g2] = s.g().derivatives(x);
        let [_, h1, h2] = s.h().derivatives(y);
        prop_assert!(ode.residual(g1, g2, h1, h2).abs() <= 1e-10 * (1.0 + c.abs()));
    }

    #[test]
    fn euler_lagrange_bridge(
        family in 0usize..3,
        g in 1.01..4.0f64,
        e in 0.1..2.0f64,
        j in jet(),
    ) {
        let p = match family {
            0 => OperatorParams::new(g, e).unwrap(),
            1 => OperatorParams::new(-g, -e).unwrap(),
            _ => OperatorParams::new(1.0, e).unwrap(),
        };
        prop_assume!(j.w() > 1e-3);
        let d = density(p).unwrap();
        let [_, d1, _] = d.derivatives(j.w()).unwrap();
        let denom = 2.0 * p.epsilon + (p.gamma - 1.0) * j.w();
        let lhs = el_residual(p, &j).unwrap() * denom;
        let rhs = 2.0 * d1 * l_residual(p, &j);
        prop_assert!(close(lhs, rhs, 2.0 * d1.abs() * l_magnitude(p, &j), 1e-10));
        let lam = d.lambda_from_derivatives(j.w()).unwrap();
        prop_assert!(close(lam, lambda_value(p, j.w()).unwrap(), 0.0, 1e-10));
    }

    #[test]
    fn sweeps_identical_across_execution_modes(c in 0.1..3.0f64, n in 1usize..300) {
        let f = build_wrong_mse_solution(c).unwrap();
        let p = OperatorParams::new(1.5, 0.5).unwrap();
        let pts: Vec<Point2> = (0..n).map(|k| Point2::new((k as f64).sin() * 3.0, (k as f64 * 0.37).cos() * 3.0)).collect();
        let a = l_residuals_at(Execution::Sequential, p, &f, &pts).unwrap();
        let b = l_residuals_at(Execution::Parallel, p, &f, &pts).unwrap();
        prop_assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
