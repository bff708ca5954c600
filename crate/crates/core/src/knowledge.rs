//! Bernstein-property status of the family over `(gamma, epsilon)`,
//! dimension, regularity and codimension.
//!
//! The table is hand-encoded. Each verdict carries an anchor key naming the
//! published result it rests on, and witnesses where non-linear entire
//! solutions are known. Constructive witnesses are re-checked against the
//! residual operators by [`witness_max_residual`].
//!
//! Verdicts only depend on the sign of `epsilon`: `a u(x, y)` rescales
//! solutions between any two epsilons of the same sign (see
//! [`normalize_epsilon`]) and preserves affinity.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{
    build_wrong_mse_solution, holomorphic_map, scale_field, HolomorphicKind, ScalingParams,
};
use crate::fields::{catalog, CatalogId, FieldError, Point2, ScalarField2};
use crate::operators::{l_residual, mss_residual, OperatorParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(u32),
    #[error("codimension must be at least 1, got {0}")]
    Codimension(u32),
    #[error("gradient bound must be positive and finite, got {0}")]
    GradientBound(f64),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    C2,
    C4,
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularity::C2 => "c2",
            Regularity::C4 => "c4",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinQuery {
    pub params: OperatorParams,
    pub dim: u32,
    pub regularity: Regularity,
    /// A priori bound on `|Du|` (or `|Df|` for systems).
    pub gradient_bound: Option<f64>,
    pub codimension: u32,
}

impl BernsteinQuery {
    /// Entire `C^2` graphs of codimension one over the plane.
    pub fn plane(params: OperatorParams) -> Self {
        BernsteinQuery {
            params,
            dim: 2,
            regularity: Regularity::C2,
            gradient_bound: None,
            codimension: 1,
        }
    }

    pub fn with_dim(mut self, dim: u32) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }

    pub fn with_gradient_bound(mut self, bound: f64) -> Self {
        self.gradient_bound = Some(bound);
        self
    }

    pub fn with_codimension(mut self, k: u32) -> Self {
        self.codimension = k;
        self
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.dim < 2 {
            return Err(QueryError::Dimension(self.dim));
        }
        if self.codimension < 1 {
            return Err(QueryError::Codimension(self.codimension));
        }
        match self.gradient_bound {
            Some(b) if !(b > 0.0 && b.is_finite()) => Err(QueryError::GradientBound(b)),
            _ => Ok(()),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernsteinStatus {
    Holds,
    Fails,
    ConditionalHolds,
    Open,
    NotCovered,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// An explicit solution this crate can evaluate and check.
    Constructive,
    /// A known solution or existence argument outside the crate's catalog.
    Reference,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub id: String,
    pub kind: WitnessKind,
}

impl Witness {
    fn constructive(id: &str) -> Self {
        Witness {
            id: id.to_string(),
            kind: WitnessKind::Constructive,
        }
    }

    fn reference(id: &str) -> Self {
        Witness {
            id: id.to_string(),
            kind: WitnessKind::Reference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinVerdict {
    pub status: BernsteinStatus,
    pub witnesses: Vec<Witness>,
    /// Hypothesis under which a conditional verdict holds.
    pub condition: Option<String>,
    /// Key of the published result backing the verdict.
    pub anchor: String,
    pub summary: String,
}

impl BernsteinVerdict {
    fn new(status: BernsteinStatus, anchor: &str, summary: &str) -> Self {
        BernsteinVerdict {
            status,
            witnesses: Vec::new(),
            condition: None,
            anchor: anchor.to_string(),
            summary: summary.to_string(),
        }
    }

    fn witnessed(mut self, w: Vec<Witness>) -> Self {
        self.witnesses = w;
        self
    }

    fn conditional(mut self, condition: &str) -> Self {
        self.condition = Some(condition.to_string());
        self
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn not_covered() -> BernsteinVerdict {
    BernsteinVerdict::new(
        BernsteinStatus::NotCovered,
        "no-statement",
        "no Bernstein-type statement is recorded for this combination",
    )
}

/// Looks up the recorded Bernstein status for `q`.
pub fn bernstein_verdict(q: &BernsteinQuery) -> Result<BernsteinVerdict, QueryError> {
    use BernsteinStatus::*;
    q.validate()?;
    let gamma = q.params.gamma;
    let eps = sign(q.params.epsilon);
    let n = q.dim;

    if q.codimension > 1 {
        if (gamma, eps) != (-1.0, -1) {
            return Ok(not_covered());
        }
        return Ok(match q.gradient_bound {
            Some(_) if n <= 3 => BernsteinVerdict::new(
                ConditionalHolds,
                "minimal-system-bounded-gradient-n-le-3",
                "entire solutions of the minimal surface system with bounded gradient are affine for n <= 3",
            )
            .conditional("|Df| bounded on R^n"),
            Some(_) => BernsteinVerdict::new(
                Fails,
                "minimal-system-bounded-gradient-fails-n-ge-4",
                "bounded gradient no longer forces affinity for n >= 4 (Lawson-Osserman cone)",
            )
            .witnessed(vec![Witness::reference("lawson-osserman-cone")]),
            None if n == 2 && q.codimension == 2 => BernsteinVerdict::new(
                Fails,
                "minimal-system-holomorphic",
                "every holomorphic map C -> C solves the 2D minimal surface system",
            )
            .witnessed(
                ["holomorphic-z^2", "holomorphic-z^3", "holomorphic-exp"]
                    .iter()
                    .map(|id| Witness::constructive(id))
                    .collect(),
            ),
            None => not_covered(),
        });
    }

    let v = match (gamma, eps) {
        (g, -1) if g == -1.0 => match (n, q.gradient_bound) {
            (2, _) => BernsteinVerdict::new(
                Holds,
                "bernstein-minimal-surface-2d",
                "entire C^2 solutions of the minimal surface equation over R^2 are affine",
            ),
            (3..=7, _) => BernsteinVerdict::new(
                Holds,
                "minimal-surface-n-le-7",
                "entire C^2 solutions of the minimal surface equation over R^n, n <= 7, are affine",
            ),
            (_, Some(_)) => BernsteinVerdict::new(
                ConditionalHolds,
                "minimal-surface-growth-conditions",
                "under growth conditions on u or Du the minimal surface equation has the Bernstein property in every dimension",
            )
            .conditional("growth bound on Du"),
            (_, None) => BernsteinVerdict::new(
                Fails,
                "minimal-surface-fails-n-ge-8",
                "entire non-linear minimal graphs exist over R^n for n >= 8",
            )
            .witnessed(vec![Witness::reference("bombieri-de-giorgi-giusti-graph")]),
        },
        (g, 0) if g == 1.0 => match (n, q.regularity) {
            (2, _) => BernsteinVerdict::new(
                Holds,
                "infinity-harmonic-2d",
                "entire C^2 infinity-harmonic functions on R^2 are affine",
            ),
            (_, Regularity::C4) => BernsteinVerdict::new(
                Holds,
                "infinity-harmonic-c4-rn",
                "entire C^4 infinity-harmonic functions on R^n are affine",
            ),
            (_, Regularity::C2) => BernsteinVerdict::new(
                Open,
                "infinity-harmonic-c2-rn-open",
                "unknown whether C^2 regularity suffices for n > 2",
            ),
        },
        (g, 0) if g == -1.0 && n == 2 => BernsteinVerdict::new(
            Fails,
            "one-laplace-solutions",
            "u = g(x) for any C^2 profile g, and exp(x + y), solve the 1-Laplace form",
        )
        .witnessed(vec![
            Witness::constructive(CatalogId::UnivariateG.as_str()),
            Witness::constructive(CatalogId::ExpSum.as_str()),
        ]),
        (g, 0) if g == 0.0 && n == 2 => BernsteinVerdict::new(
            Fails,
            "quadratic-sum-solution",
            "x^2 + y^2 is an entire non-linear solution",
        )
        .witnessed(vec![Witness::constructive(CatalogId::QuadraticSum.as_str())]),
        (g, 0) if g.abs() > 1.0 => match (n, q.gradient_bound) {
            (_, Some(_)) => BernsteinVerdict::new(
                ConditionalHolds,
                "p-harmonic-growth-conditions",
                "entire p-harmonic functions satisfying suitable growth conditions are affine, in every dimension",
            )
            .conditional("growth bound on Du"),
            (2, None) => BernsteinVerdict::new(
                Open,
                "p-harmonic-c2-open",
                "unknown whether entire C^2 solutions are affine without growth conditions",
            ),
            _ => not_covered(),
        },
        (g, 1) if g == -1.0 => match (n, q.gradient_bound) {
            (_, Some(b)) if b < 1.0 => BernsteinVerdict::new(
                ConditionalHolds,
                "maximal-surface-spacelike",
                "entire solutions of the maximal surface equation with sup |Du| < 1 are affine, in every dimension",
            )
            .conditional("sup |Du| < 1"),
            (2, _) => BernsteinVerdict::new(
                Fails,
                "maximal-surface-x-plus-h",
                "u = x + h(y) solves the equation for any C^2 profile h",
            )
            .witnessed(vec![Witness::constructive(CatalogId::XPlusH.as_str())]),
            _ => not_covered(),
        },
        (g, -1) if g == 1.0 => BernsteinVerdict::new(
            NotCovered,
            "isentropic-flow",
            "arises for isentropic irrotational steady plane flows; no Bernstein statement",
        ),
        (g, 1) if g >= 1.0 && n == 2 => {
            let mut w = Vec::new();
            if g == 1.0 {
                w.push(Witness::constructive("separable-wrong-mse"));
            }
            w.push(Witness::reference("nitsche-criterion"));
            BernsteinVerdict::new(
                Fails,
                "elliptic-family-nitsche-divergence",
                "the Nitsche integral diverges, so entire non-linear solutions exist",
            )
            .witnessed(w)
        }
        (g, -1) if g < -1.0 && n == 2 => BernsteinVerdict::new(
            Fails,
            "elliptic-family-nitsche-divergence",
            "the Nitsche integral diverges, so entire non-linear solutions exist",
        )
        .witnessed(vec![Witness::reference("nitsche-criterion")]),
        _ => not_covered(),
    };
    Ok(v)
}

/// Rewrites `params` with `epsilon` in `{-1, 0, 1}`. The returned scaling
/// (`a = sqrt|eps|`, `b = 1`) maps solutions of the normalized problem to
/// solutions of the original one.
pub fn normalize_epsilon(params: OperatorParams) -> (OperatorParams, ScalingParams) {
    let e = params.epsilon;
    if e == 0.0 || e.abs() == 1.0 {
        return (params, ScalingParams::IDENTITY);
    }
    let normalized = OperatorParams::new_unchecked(params.gamma, e.signum());
    (
        normalized,
        ScalingParams {
            a: e.abs().sqrt(),
            b: 1.0,
        },
    )
}

/// Largest residual of a constructive witness over `points`, evaluated for
/// the queried parameters. `None` for reference witnesses and for witnesses
/// that do not apply to `params`.
pub fn witness_max_residual(
    id: &str,
    params: OperatorParams,
    points: &[Point2],
) -> Option<Result<f64, FieldError>> {
    if let Some(kind) = id.strip_prefix("holomorphic-") {
        let kind: HolomorphicKind = kind.parse().ok()?;
        let mut worst = 0.0f64;
        for p in points {
            let m = holomorphic_map(kind, *p).ok()?;
            worst = mss_residual(&m).iter().fold(worst, |w, r| w.max(r.abs()));
        }
        return Some(Ok(worst));
    }
    let (normalized, scaling) = normalize_epsilon(params);
    let field: ScalarField2 = if id == "separable-wrong-mse" {
        if normalized != OperatorParams::new_unchecked(1.0, 1.0) {
            return None;
        }
        build_wrong_mse_solution(1.0).ok()?
    } else {
        let entry = catalog(id.parse().ok()?);
        if !entry.solves.includes(normalized) {
            return None;
        }
        entry.field
    };
    let field = scale_field(field, scaling);
    let mut worst = 0.0f64;
    for p in points {
        match field.jet(*p) {
            Ok(j) => worst = worst.max(l_residual(params, &j).abs()),
            Err(e) => return Some(Err(e)),
        }
    }
    Some(Ok(worst))
}

/// One row of the exported table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub gamma: f64,
    pub epsilon: f64,
    pub dim: u32,
    pub regularity: Regularity,
    pub status: BernsteinStatus,
    pub anchor: String,
    pub witnesses: Vec<String>,
}

pub const TABLE_GAMMAS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
pub const TABLE_EPSILONS: [f64; 3] = [-1.0, 0.0, 1.0];
pub const TABLE_DIMS: [u32; 3] = [2, 5, 8];

/// Verdicts over the declared query lattice, codimension one, no gradient
/// bound.
pub fn knowledge_table() -> Vec<TableRow> {
    let mut rows = Vec::new();
    for gamma in TABLE_GAMMAS {
        for epsilon in TABLE_EPSILONS {
            for dim in TABLE_DIMS {
                for regularity in [Regularity::C2, Regularity::C4] {
                    let params = OperatorParams::new_unchecked(gamma, epsilon);
                    let q = BernsteinQuery::plane(params)
                        .with_dim(dim)
                        .with_regularity(regularity);
                    let v = bernstein_verdict(&q).expect("lattice queries are valid");
                    rows.push(TableRow {
                        gamma,
                        epsilon,
                        dim,
                        regularity,
                        status: v.status,
                        anchor: v.anchor,
                        witnesses: v.witnesses.into_iter().map(|w| w.id).collect(),
                    });
                }
            }
        }
    }
    rows
}
