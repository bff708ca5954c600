use bernstein_core::fields::Point2;
use bernstein_core::knowledge::{
    bernstein_verdict, knowledge_table, normalize_epsilon, witness_max_residual, BernsteinQuery,
    BernsteinStatus, Regularity, WitnessKind,
};
use bernstein_core::operators::{ellipticity, OperatorParams};
use bernstein_core::variational::{density, nitsche_verdict, BernsteinConclusion, NitscheVerdict};

fn sample_grid() -> Vec<Point2> {
    (0..9)
        .flat_map(|i| {
            (0..9).map(move |j| Point2::new(-1.0 + 0.25 * i as f64, -1.0 + 0.25 * j as f64))
        })
        .collect()
}

fn queries() -> Vec<BernsteinQuery> {
    let mut out = Vec::new();
    for g in [-3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        for e in [-4.0, -1.0, -0.25, 0.0, 0.25, 1.0, 4.0] {
            for n in [2, 3, 4, 7, 8, 10] {
                for reg in [Regularity::C2, Regularity::C4] {
                    for k in [1, 2] {
                        let base = BernsteinQuery::plane(OperatorParams::new(g, e).unwrap())
                            .with_dim(n)
                            .with_regularity(reg)
                            .with_codimension(k);
                        out.push(base);
                        out.push(base.with_gradient_bound(0.5));
                        out.push(base.with_gradient_bound(2.0));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn every_fails_verdict_has_a_witness_and_constructive_ones_check_out() {
    let pts = sample_grid();
    let mut constructive = 0;
    for q in queries() {
        let v = bernstein_verdict(&q).unwrap();
        assert!(!v.anchor.is_empty());
        if v.status == BernsteinStatus::ConditionalHolds {
            assert!(v.condition.is_some());
        }
        if v.status != BernsteinStatus::Fails {
            continue;
        }
        assert!(!v.witnesses.is_empty(), "{q:?}");
        for w in v
            .witnesses
            .iter()
            .filter(|w| w.kind == WitnessKind::Constructive)
        {
            let r = witness_max_residual(&w.id, q.params, &pts)
                .unwrap_or_else(|| panic!("{} does not apply to {q:?}", w.id))
                .unwrap();
            assert!(r <= 1e-8, "{} at {:?}: {r:e}", w.id, q.params);
            constructive += 1;
        }
    }
    assert!(constructive > 0);
}

#[test]
fn nitsche_and_knowledge_agree_where_both_speak() {
    for g in [-3.0, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 3.0] {
        for e in [-1.0, -0.25, 0.25, 1.0, 4.0] {
            let p = OperatorParams::new(g, e).unwrap();
            if density(p).is_err() {
                continue;
            }
            let rep = nitsche_verdict(p).unwrap();
            let v = bernstein_verdict(&BernsteinQuery::plane(p)).unwrap();
            match rep.bernstein_conclusion {
                BernsteinConclusion::NoBernsteinProperty => {
                    assert_eq!(rep.verdict, NitscheVerdict::Diverges);
                    assert_eq!(v.status, BernsteinStatus::Fails, "{p}");
                }
                BernsteinConclusion::CriterionSilent => {
                    assert_ne!(v.status, BernsteinStatus::Fails, "{p}");
                }
            }
        }
    }
}

#[test]
fn elliptic_family_fails_in_the_plane() {
    for (g, e) in [
        (1.0, 1.0),
        (2.0, 0.5),
        (3.0, 4.0),
        (-2.0, -1.0),
        (-3.0, -0.25),
    ] {
        let p = OperatorParams::new(g, e).unwrap();
        assert!(ellipticity(p).elliptic);
        let v = bernstein_verdict(&BernsteinQuery::plane(p)).unwrap();
        assert_eq!(v.status, BernsteinStatus::Fails);
    }
}

#[test]
fn normalize_examples() {
    let (p, s) = normalize_epsilon(OperatorParams::new(3.0, 4.0).unwrap());
    assert_eq!((p.gamma, p.epsilon, s.a, s.b), (3.0, 1.0, 2.0, 1.0));
    let (p, s) = normalize_epsilon(OperatorParams::new(3.0, -9.0).unwrap());
    assert_eq!((p.gamma, p.epsilon, s.a, s.b), (3.0, -1.0, 3.0, 1.0));
    let (p, s) = normalize_epsilon(OperatorParams::new(3.0, 0.0).unwrap());
    assert_eq!((p.epsilon, s.a, s.b), (0.0, 1.0, 1.0));
}

#[test]
fn table_is_total_and_serializes() {
    let rows = knowledge_table();
    assert_eq!(rows.len(), 5 * 3 * 3 * 2);
    let json = serde_json::to_value(&rows).unwrap();
    let first = &json[0];
    for key in [
        "gamma",
        "epsilon",
        "dim",
        "regularity",
        "status",
        "anchor",
        "witnesses",
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(serde_json::to_value(&rows).unwrap(), json);
}
