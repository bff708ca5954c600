//! Explicit entire non-linear solutions: the separation ansatz
//! `u = g(x) + h(y)`, the amplitude/coordinate scaling, and holomorphic
//! maps for the minimal surface system.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{Jet2, MapJet2, Point2, ScalarField2};
use crate::operators::OperatorParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("scaling factors must be finite and nonzero (a = {a}, b = {b})")]
    InvalidScaling { a: f64, b: f64 },
    #[error("epsilon {from} cannot be rescaled to {to}")]
    IncompatibleEpsilon { from: f64, to: f64 },
    #[error("unknown holomorphic map `{0}`")]
    UnknownKind(String),
    #[error("separation constant must be finite, got {0}")]
    NonFiniteConstant(f64),
}

/// How the separated equation decouples.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Splitting {
    /// `(eps + g'^2) g'' = c`, `(eps + h'^2) h'' = -c`; happens for `gamma = 1`.
    Constant,
    None,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    X,
    Y,
}

/// A family `u = s x + h(y)` (or `u = g(x) + s y`) with arbitrary profile,
/// produced by a vanishing coefficient in the reduced equation.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFamily {
    /// The variable in which the solution is linear.
    pub linear_in: Axis,
    /// Admissible slopes `±s` (equal when `s = 0`).
    pub slopes: [f64; 2],
}

/// The equation left after substituting `u = g(x) + h(y)` (so `u_xy = 0`):
///
/// ```text
/// (2 eps + (g+1) g'^2 + (g-1) h'^2) g'' + (2 eps + (g-1) g'^2 + (g+1) h'^2) h'' = 0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableOde {
    pub params: OperatorParams,
    pub splitting: Splitting,
    pub degenerate_families: Vec<DegenerateFamily>,
}

impl SeparableOde {
    /// Coefficients of `g''` and `h''`.
    pub fn coefficients(&self, g1: f64, h1: f64) -> (f64, f64) {
        let (a, _, c) = self.params.coefficients(g1, h1);
        (a, c)
    }

    /// Reduced residual for `g'`, `g''`, `h'`, `h''` at a point.
    pub fn residual(&self, g1: f64, g2: f64, h1: f64, h2: f64) -> f64 {
        let (cg, ch) = self.coefficients(g1, h1);
        cg * g2 + ch * h2
    }
}

pub fn reduce_separable(params: OperatorParams) -> SeparableOde {
    let OperatorParams { gamma, epsilon } = params;
    // The g'' coefficient is free of h' (and the h'' one free of g') exactly
    // when gamma = 1.
    let splitting = if gamma == 1.0 {
        Splitting::Constant
    } else {
        Splitting::None
    };

    // With gamma = -1 the h'' coefficient is 2 eps - 2 g'^2: it vanishes for
    // g' = ±sqrt(eps), leaving h arbitrary. Symmetrically in y.
    let mut degenerate_families = Vec::new();
    if gamma == -1.0 && epsilon >= 0.0 {
        let s = epsilon.sqrt();
        for linear_in in [Axis::X, Axis::Y] {
            degenerate_families.push(DegenerateFamily {
                linear_in,
                slopes: [s, -s],
            });
        }
    }
    SeparableOde {
        params,
        splitting,
        degenerate_families,
    }
}

/// Unique real root of `t + t^3/3 = s`.
pub fn monotone_cubic_root(s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    // depressed cubic t^3 + 3t - 3s = 0 has the hyperbolic root
    // t = 2 sinh(asinh(3s/2) / 3)
    let mut t = 2.0 * ((1.5 * s).asinh() / 3.0).sinh();
    for _ in 0..4 {
        let f = t + t * t * t / 3.0 - s;
        if f.abs() <= 1e-15 * s.abs().max(1.0) {
            break;
        }
        t -= f / (1.0 + t * t);
    }
    t
}

/// One factor of the separated solution: `(1 + q'^2) q'' = c`, `q(0) = q'(0) = 0`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub c: f64,
}

impl Profile {
    pub fn slope(&self, t: f64) -> f64 {
        monotone_cubic_root(self.c * t)
    }

    /// `[q, q', q'']`. The value uses `q = (q'^2/2 + q'^4/4) / c`, which
    /// follows from `dt = (1 + q'^2) dq' / c`.
    pub fn derivatives(&self, t: f64) -> [f64; 3] {
        let d = self.slope(t);
        let d2 = d * d;
        let value = if self.c == 0.0 {
            0.0
        } else {
            (0.5 * d2 + 0.25 * d2 * d2) / self.c
        };
        [value, d, self.c / (1.0 + d2)]
    }
}

/// `u(x, y) = g(x) + h(y)` solving the wrong minimal surface equation, with
/// `(1 + g'^2) g'' = c` and `(1 + h'^2) h'' = -c`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableSolution {
    pub c: f64,
}

impl SeparableSolution {
    pub fn new(c: f64) -> Result<Self, ConstructionError> {
        if c.is_finite() {
            Ok(SeparableSolution { c })
        } else {
            Err(ConstructionError::NonFiniteConstant(c))
        }
    }

    pub fn g(&self) -> Profile {
        Profile { c: self.c }
    }

    pub fn h(&self) -> Profile {
        Profile { c: -self.c }
    }

    pub fn jet(&self, p: Point2) -> Jet2 {
        let [g, g1, g2] = self.g().derivatives(p.x);
        let [h, h1, h2] = self.h().derivatives(p.y);
        Jet2::new(g + h, [g1, h1], [g2, 0.0, h2])
    }

    pub fn value(&self, p: Point2) -> f64 {
        self.g().derivatives(p.x)[0] + self.h().derivatives(p.y)[0]
    }

    pub fn is_linear(&self) -> bool {
        self.c == 0.0
    }
}

pub fn build_wrong_mse_solution(c: f64) -> Result<ScalarField2, ConstructionError> {
    Ok(ScalarField2::Separable(SeparableSolution::new(c)?))
}

/// `v(x, y) = a u(b x, b y)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub a: f64,
    pub b: f64,
}

impl ScalingParams {
    pub fn new(a: f64, b: f64) -> Result<Self, ConstructionError> {
        if a.is_finite() && b.is_finite() && a != 0.0 && b != 0.0 {
            Ok(ScalingParams { a, b })
        } else {
            Err(ConstructionError::InvalidScaling { a, b })
        }
    }

    pub const IDENTITY: ScalingParams = ScalingParams { a: 1.0, b: 1.0 };

    /// `a^2 b^2`: the factor by which `epsilon` changes.
    pub fn epsilon_factor(&self) -> f64 {
        self.a * self.a * self.b * self.b
    }

    /// `a^3 b^4`, the factor in front of the transformed operator.
    pub fn residual_factor(&self) -> f64 {
        self.a * self.a * self.a * self.b * self.b * self.b * self.b
    }

    /// If `u` solves `L_params`, the scaled field solves the returned member.
    pub fn transform_params(&self, params: OperatorParams) -> OperatorParams {
        OperatorParams::new_unchecked(params.gamma, params.epsilon * self.epsilon_factor())
    }

    /// Scaling (with `b = 1`) taking solutions for `source` epsilon to
    /// solutions for `target` epsilon.
    pub fn between_epsilons(source: f64, target: f64) -> Result<Self, ConstructionError> {
        let ratio = target / source;
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(ConstructionError::IncompatibleEpsilon {
                from: source,
                to: target,
            });
        }
        ScalingParams::new(ratio.sqrt(), 1.0)
    }
}

/// `a u(b x, b y)` with exact chain-rule jets. It satisfies
/// `L_{g,eps}[v](x, y) = a^3 b^4 L_{g, eps/(a^2 b^2)}[u](b x, b y)`.
pub fn scale_field(field: ScalarField2, s: ScalingParams) -> ScalarField2 {
    if s == ScalingParams::IDENTITY {
        return field;
    }
    ScalarField2::scaled(field, s.a, s.b)
}

/// Holomorphic functions regarded as maps of the plane.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolomorphicKind {
    /// `z^n`, `n` in `1..=4`.
    Power(u32),
    Exponential,
}

impl HolomorphicKind {
    pub const CATALOG: [HolomorphicKind; 5] = [
        HolomorphicKind::Power(1),
        HolomorphicKind::Power(2),
        HolomorphicKind::Power(3),
        HolomorphicKind::Power(4),
        HolomorphicKind::Exponential,
    ];

    fn check(self) -> Result<Self, ConstructionError> {
        match self {
            HolomorphicKind::Power(n) if !(1..=4).contains(&n) => {
                Err(ConstructionError::UnknownKind(self.to_string()))
            }
            _ => Ok(self),
        }
    }

    // f, f', f''
    fn eval(self, z: Complex64) -> [Complex64; 3] {
        match self {
            HolomorphicKind::Exponential => {
                let e = z.exp();
                [e, e, e]
            }
            HolomorphicKind::Power(n) => {
                let n = n as i32;
                let nf = n as f64;
                [
                    z.powi(n),
                    nf * z.powi(n - 1),
                    if n >= 2 {
                        nf * (nf - 1.0) * z.powi(n - 2)
                    } else {
                        Complex64::new(0.0, 0.0)
                    },
                ]
            }
        }
    }
}

impl fmt::Display for HolomorphicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HolomorphicKind::Power(n) => write!(f, "z^{n}"),
            HolomorphicKind::Exponential => f.write_str("exp"),
        }
    }
}

impl FromStr for HolomorphicKind {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s {
            "exp" | "e^z" => HolomorphicKind::Exponential,
            "z" => HolomorphicKind::Power(1),
            _ => {
                let n = s
                    .strip_prefix("z^")
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| ConstructionError::UnknownKind(s.to_string()))?;
                HolomorphicKind::Power(n)
            }
        };
        kind.check()
    }
}

/// Jets of `(Re f, Im f)` at `point`.
pub fn holomorphic_map(kind: HolomorphicKind, point: Point2) -> Result<MapJet2, ConstructionError> {
    let [f, d1, d2] = kind.check()?.eval(Complex64::new(point.x, point.y));
    // d/dx = f', d/dy = i f'; d2/dxdy = i f'', d2/dy2 = -f''
    let re = Jet2::new(f.re, [d1.re, -d1.im], [d2.re, -d2.im, -d2.re]);
    let im = Jet2::new(f.im, [d1.im, d1.re], [d2.im, d2.re, -d2.im]);
    Ok(MapJet2::new(re, im))
}
