//! Scalar and vector fields over the plane with exact second-order jets.
//!
//! Every field in this module knows its own closed-form derivatives; the
//! finite-difference jet ([`fd_jet`]) exists only to cross-check them.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::SeparableSolution;
use crate::operators::OperatorParams;

/// Default bound on `|x + y|` for the exponential field.
pub const EXP_SUM_LIMIT: f64 = 30.0;

/// Smallest finite-difference step accepted by [`fd_jet`].
pub const FD_MIN_STEP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("point ({x}, {y}) is not finite")]
    NonFinitePoint { x: f64, y: f64 },
    #[error("|x + y| = {sum} exceeds the exponential field guard {limit}")]
    ExpGuard { sum: f64, limit: f64 },
    #[error("step {step} is below the finite-difference floor {floor}")]
    StepTooSmall { step: f64, floor: f64 },
    #[error("jet provider refused the point: {0}")]
    Refused(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownSolution(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn check(self) -> Result<Self, FieldError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(FieldError::NonFinitePoint {
                x: self.x,
                y: self.y,
            })
        }
    }
}

/// Value, gradient and (symmetric) Hessian of a scalar field at a point.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

impl Jet2 {
    pub const fn new(value: f64, grad: [f64; 2], hess: [f64; 3]) -> Self {
        Jet2 {
            value,
            ux: grad[0],
            uy: grad[1],
            uxx: hess[0],
            uxy: hess[1],
            uyy: hess[2],
        }
    }

    pub fn grad(&self) -> [f64; 2] {
        [self.ux, self.uy]
    }

    /// `(u_xx, u_xy, u_yy)`.
    pub fn hess(&self) -> [f64; 3] {
        [self.uxx, self.uxy, self.uyy]
    }

    /// `|Du|^2`.
    pub fn w(&self) -> f64 {
        self.ux * self.ux + self.uy * self.uy
    }

    pub fn laplacian(&self) -> f64 {
        self.uxx + self.uyy
    }

    /// `<D^2u Du, Du> = u_x^2 u_xx + 2 u_x u_y u_xy + u_y^2 u_yy`.
    pub fn hess_grad_grad(&self) -> f64 {
        self.ux * self.ux * self.uxx
            + 2.0 * self.ux * self.uy * self.uxy
            + self.uy * self.uy * self.uyy
    }

    pub fn is_finite(&self) -> bool {
        [self.value, self.ux, self.uy, self.uxx, self.uxy, self.uyy]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Sum of two jets at the same point.
    pub fn add(&self, other: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + other.value,
            ux: self.ux + other.ux,
            uy: self.uy + other.uy,
            uxx: self.uxx + other.uxx,
            uxy: self.uxy + other.uxy,
            uyy: self.uyy + other.uyy,
        }
    }
}

/// Jets of both components of a map `f: R^2 -> R^2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MapJet2 {
    pub components: [Jet2; 2],
}

impl MapJet2 {
    pub fn new(first: Jet2, second: Jet2) -> Self {
        MapJet2 {
            components: [first, second],
        }
    }

    pub fn fx(&self) -> [f64; 2] {
        [self.components[0].ux, self.components[1].ux]
    }

    pub fn fy(&self) -> [f64; 2] {
        [self.components[0].uy, self.components[1].uy]
    }

    pub fn fxx(&self) -> [f64; 2] {
        [self.components[0].uxx, self.components[1].uxx]
    }

    pub fn fxy(&self) -> [f64; 2] {
        [self.components[0].uxy, self.components[1].uxy]
    }

    pub fn fyy(&self) -> [f64; 2] {
        [self.components[0].uyy, self.components[1].uyy]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetNError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("gradient has {grad} entries but Hessian has {hess} (expected n*n)")]
    ShapeMismatch { grad: usize, hess: usize },
    #[error("Hessian is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
}

/// Gradient and Hessian of a scalar field on `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetN {
    grad: Vec<f64>,
    // row-major n x n
    hess: Vec<f64>,
}

impl JetN {
    pub fn new(grad: Vec<f64>, hess: Vec<f64>) -> Result<Self, JetNError> {
        let n = grad.len();
        if n == 0 {
            return Err(JetNError::EmptyDimension);
        }
        if hess.len() != n * n {
            return Err(JetNError::ShapeMismatch {
                grad: n,
                hess: hess.len(),
            });
        }
        for j in 0..n {
            for k in (j + 1)..n {
                if hess[j * n + k] != hess[k * n + j] {
                    return Err(JetNError::NotSymmetric(j, k));
                }
            }
        }
        Ok(JetN { grad, hess })
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, j: usize, k: usize) -> f64 {
        self.hess[j * self.dim() + k]
    }
}

impl From<Jet2> for JetN {
    fn from(j: Jet2) -> Self {
        JetN {
            grad: vec![j.ux, j.uy],
            hess: vec![j.uxx, j.uxy, j.uxy, j.uyy],
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth function of one variable together with its first two derivatives.
#[derive(Clone)]
pub struct Univariate {
    name: String,
    f: RealFn,
    df: RealFn,
    d2f: RealFn,
}

impl Univariate {
    pub fn new<F, D, D2>(name: impl Into<String>, f: F, df: D, d2f: D2) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Univariate {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }

    /// `t^3`.
    pub fn cubic() -> Self {
        Univariate::new("t^3", |t| t * t * t, |t| 3.0 * t * t, |t| 6.0 * t)
    }

    /// `sin(2t) + t^3/6`, the catalog's default arbitrary profile.
    pub fn wavy() -> Self {
        Univariate::new(
            "sin(2t)+t^3/6",
            |t| (2.0 * t).sin() + t * t * t / 6.0,
            |t| 2.0 * (2.0 * t).cos() + t * t / 2.0,
            |t| -4.0 * (2.0 * t).sin() + t,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn derivatives(&self, t: f64) -> [f64; 3] {
        [(self.f)(t), (self.df)(t), (self.d2f)(t)]
    }
}

impl fmt::Debug for Univariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Univariate")
            .field("name", &self.name)
            .finish()
    }
}

/// User-supplied exact jets.
pub trait JetProvider: Send + Sync + fmt::Debug {
    fn jet(&self, p: Point2) -> Result<Jet2, FieldError>;
}

/// A closed-form scalar field over the plane.
#[derive(Clone, Debug)]
pub enum ScalarField2 {
    /// `a x + b y + c`
    Affine {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `x^2 + y^2`
    QuadraticSum,
    /// `exp(x + y)`, evaluable only where `|x + y| <= limit`.
    ExpSum {
        limit: f64,
    },
    /// `g(x)`
    UnivariateG(Univariate),
    /// `x + h(y)`
    XPlusH(Univariate),
    /// `g(x) + h(y)` from the separation construction.
    Separable(SeparableSolution),
    /// `a * u(b x, b y)`
    Scaled {
        inner: Arc<ScalarField2>,
        a: f64,
        b: f64,
    },
    Custom(Arc<dyn JetProvider>),
}

impl ScalarField2 {
    pub fn affine(a: f64, b: f64, c: f64) -> Self {
        ScalarField2::Affine { a, b, c }
    }

    pub fn exp_sum() -> Self {
        ScalarField2::ExpSum {
            limit: EXP_SUM_LIMIT,
        }
    }

    pub fn scaled(inner: ScalarField2, a: f64, b: f64) -> Self {
        ScalarField2::Scaled {
            inner: Arc::new(inner),
            a,
            b,
        }
    }

    /// Exact jet at `p`.
    pub fn jet(&self, p: Point2) -> Result<Jet2, FieldError> {
        let Point2 { x, y } = p.check()?;
        Ok(match self {
            ScalarField2::Affine { a, b, c } => Jet2::new(a * x + b * y + c, [*a, *b], [0.0; 3]),
            ScalarField2::QuadraticSum => {
                Jet2::new(x * x + y * y, [2.0 * x, 2.0 * y], [2.0, 0.0, 2.0])
            }
            ScalarField2::ExpSum { limit } => {
                let s = x + y;
                if s.abs() > *limit {
                    return Err(FieldError::ExpGuard {
                        sum: s,
                        limit: *limit,
                    });
                }
                let e = s.exp();
                Jet2::new(e, [e, e], [e, e, e])
            }
            ScalarField2::UnivariateG(g) => {
                let [v, d, d2] = g.derivatives(x);
                Jet2::new(v, [d, 0.0], [d2, 0.0, 0.0])
            }
            ScalarField2::XPlusH(h) => {
                let [v, d, d2] = h.derivatives(y);
                Jet2::new(x + v, [1.0, d], [0.0, 0.0, d2])
            }
            ScalarField2::Separable(s) => s.jet(p),
            ScalarField2::Scaled { inner, a, b } => {
                let j = inner.jet(Point2::new(b * x, b * y))?;
                let ab = a * b;
                let ab2 = a * b * b;
                Jet2::new(
                    a * j.value,
                    [ab * j.ux, ab * j.uy],
                    [ab2 * j.uxx, ab2 * j.uxy, ab2 * j.uyy],
                )
            }
            ScalarField2::Custom(provider) => provider.jet(p)?,
        })
    }

    /// Field value only.
    pub fn value(&self, p: Point2) -> Result<f64, FieldError> {
        let Point2 { x, y } = p.check()?;
        match self {
            ScalarField2::UnivariateG(g) => Ok(g.eval(x)),
            ScalarField2::XPlusH(h) => Ok(x + h.eval(y)),
            ScalarField2::Separable(s) => Ok(s.value(p)),
            ScalarField2::Scaled { inner, a, b } => Ok(a * inner.value(Point2::new(b * x, b * y))?),
            _ => self.jet(p).map(|j| j.value),
        }
    }
}

/// Exact jet of `field` at `p`.
pub fn jet_of(field: &ScalarField2, p: Point2) -> Result<Jet2, FieldError> {
    field.jet(p)
}

/// Central-difference jet built from value evaluations only.
pub fn fd_jet(field: &ScalarField2, p: Point2, h: f64) -> Result<Jet2, FieldError> {
    fd_jet_with_floor(field, p, h, FD_MIN_STEP)
}

pub fn fd_jet_with_floor(
    field: &ScalarField2,
    p: Point2,
    h: f64,
    floor: f64,
) -> Result<Jet2, FieldError> {
    if !(h >= floor) {
        return Err(FieldError::StepTooSmall { step: h, floor });
    }
    let Point2 { x, y } = p.check()?;
    let f = |dx: f64, dy: f64| field.value(Point2::new(x + dx, y + dy));
    let c = f(0.0, 0.0)?;
    let e = f(h, 0.0)?;
    let w = f(-h, 0.0)?;
    let n = f(0.0, h)?;
    let s = f(0.0, -h)?;
    let ne = f(h, h)?;
    let nw = f(-h, h)?;
    let se = f(h, -h)?;
    let sw = f(-h, -h)?;
    let h2 = h * h;
    Ok(Jet2::new(
        c,
        [(e - w) / (2.0 * h), (n - s) / (2.0 * h)],
        [
            (e - 2.0 * c + w) / h2,
            (ne - nw - se + sw) / (4.0 * h2),
            (n - 2.0 * c + s) / h2,
        ],
    ))
}

/// Identifiers of the explicit solutions in the catalog.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogId {
    Affine,
    QuadraticSum,
    ExpSum,
    UnivariateG,
    XPlusH,
}

impl CatalogId {
    pub const ALL: [CatalogId; 5] = [
        CatalogId::Affine,
        CatalogId::QuadraticSum,
        CatalogId::ExpSum,
        CatalogId::UnivariateG,
        CatalogId::XPlusH,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogId::Affine => "affine",
            CatalogId::QuadraticSum => "quadratic-sum",
            CatalogId::ExpSum => "exp-sum",
            CatalogId::UnivariateG => "univariate-g",
            CatalogId::XPlusH => "x-plus-h",
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogId {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CatalogId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| FieldError::UnknownSolution(s.to_string()))
    }
}

/// Which operator parameters a catalog field solves.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Solves {
    /// Affine fields have zero Hessian and solve every member of the family.
    Every,
    Params(OperatorParams),
}

impl Solves {
    pub fn includes(&self, params: OperatorParams) -> bool {
        match self {
            Solves::Every => true,
            Solves::Params(p) => *p == params,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: CatalogId,
    pub field: ScalarField2,
    pub solves: Solves,
}

/// The explicit entire solution `id` and the parameters it solves.
pub fn catalog(id: CatalogId) -> CatalogEntry {
    let (field, solves) = match id {
        CatalogId::Affine => (ScalarField2::affine(2.0, 3.0, 1.0), Solves::Every),
        CatalogId::QuadraticSum => (
            ScalarField2::QuadraticSum,
            Solves::Params(OperatorParams::new_unchecked(0.0, 0.0)),
        ),
        CatalogId::ExpSum => (
            ScalarField2::exp_sum(),
            Solves::Params(OperatorParams::new_unchecked(-1.0, 0.0)),
        ),
        CatalogId::UnivariateG => (
            ScalarField2::UnivariateG(Univariate::wavy()),
            Solves::Params(OperatorParams::new_unchecked(-1.0, 0.0)),
        ),
        CatalogId::XPlusH => (
            ScalarField2::XPlusH(Univariate::cubic()),
            Solves::Params(OperatorParams::new_unchecked(-1.0, 1.0)),
        ),
    };
    CatalogEntry { id, field, solves }
}

/// Looks up a catalog entry by its string identifier.
pub fn catalog_by_name(name: &str) -> Result<CatalogEntry, FieldError> {
    Ok(catalog(name.parse()?))
}
