//! Pointwise residuals of `L_{gamma,eps}` and of the classical equations it
//! contains, plus the ellipticity classifier.
//!
//! The operator is
//!
//! ```text
//! L[u] = (2 eps + (g+1) u_x^2 + (g-1) u_y^2) u_xx
//!      + 4 u_x u_y u_xy
//!      + (2 eps + (g-1) u_x^2 + (g+1) u_y^2) u_yy
//! ```
//!
//! kept with its natural sign and scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::fields::{FieldError, Jet2, JetN, MapJet2, Point2, ScalarField2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("operator parameters must be finite (gamma = {gamma}, epsilon = {epsilon})")]
    NonFiniteParams { gamma: f64, epsilon: f64 },
    #[error("p-Laplacian with p = {p} < 2 is singular where the gradient vanishes")]
    SingularGradient { p: f64 },
    #[error("unknown equation form `{0}`")]
    UnknownForm(String),
}

/// The pair `(gamma, epsilon)` indexing the family.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub gamma: f64,
    pub epsilon: f64,
}

impl OperatorParams {
    pub fn new(gamma: f64, epsilon: f64) -> Result<Self, OperatorError> {
        if gamma.is_finite() && epsilon.is_finite() {
            Ok(OperatorParams { gamma, epsilon })
        } else {
            Err(OperatorError::NonFiniteParams { gamma, epsilon })
        }
    }

    /// For literals known to be finite.
    pub const fn new_unchecked(gamma: f64, epsilon: f64) -> Self {
        OperatorParams { gamma, epsilon }
    }

    /// Coefficients `(A, B, C)` of the principal part
    /// `A u_xx + B u_xy + C u_yy` at gradient `(ux, uy)`.
    pub fn coefficients(&self, ux: f64, uy: f64) -> (f64, f64, f64) {
        let ux2 = ux * ux;
        let uy2 = uy * uy;
        let two_eps = 2.0 * self.epsilon;
        let a = two_eps + (self.gamma + 1.0) * ux2 + (self.gamma - 1.0) * uy2;
        let c = two_eps + (self.gamma - 1.0) * ux2 + (self.gamma + 1.0) * uy2;
        let b = 4.0 * ux * uy;
        (a, b, c)
    }

    /// `4AC - B^2` at gradient `(ux, uy)`.
    pub fn discriminant(&self, ux: f64, uy: f64) -> f64 {
        let (a, b, c) = self.coefficients(ux, uy);
        4.0 * a * c - b * b
    }
}

impl fmt::Display for OperatorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(gamma={}, epsilon={})", self.gamma, self.epsilon)
    }
}

pub fn l_residual(params: OperatorParams, jet: &Jet2) -> f64 {
    let (a, b, c) = params.coefficients(jet.ux, jet.uy);
    a * jet.uxx + b * jet.uxy + c * jet.uyy
}

/// Sum of the absolute values of the three principal terms; the natural
/// scale against which a residual should be compared.
pub fn l_magnitude(params: OperatorParams, jet: &Jet2) -> f64 {
    let (a, b, c) = params.coefficients(jet.ux, jet.uy);
    (a * jet.uxx).abs() + (b * jet.uxy).abs() + (c * jet.uyy).abs()
}

/// `(2 eps + (g-1) w) Δu + 2 <D^2u Du, Du>`, the same operator regrouped.
pub fn l_residual_compact(params: OperatorParams, jet: &Jet2) -> f64 {
    let w = jet.w();
    (2.0 * params.epsilon + (params.gamma - 1.0) * w) * jet.laplacian() + 2.0 * jet.hess_grad_grad()
}

/// The classical two-dimensional equations that appear as members of the
/// family.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedForm {
    MinimalSurface,
    WrongMinimalSurface,
    MaximalSurface,
    OneLaplace,
}

impl NamedForm {
    pub const ALL: [NamedForm; 4] = [
        NamedForm::MinimalSurface,
        NamedForm::WrongMinimalSurface,
        NamedForm::MaximalSurface,
        NamedForm::OneLaplace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedForm::MinimalSurface => "minimal-surface",
            NamedForm::WrongMinimalSurface => "wrong-minimal-surface",
            NamedForm::MaximalSurface => "maximal-surface",
            NamedForm::OneLaplace => "one-laplace-form",
        }
    }

    /// `(params, k)` with `L_params = k * form` identically.
    pub fn family_member(self) -> (OperatorParams, f64) {
        match self {
            NamedForm::MinimalSurface => (OperatorParams::new_unchecked(-1.0, -1.0), -2.0),
            NamedForm::WrongMinimalSurface => (OperatorParams::new_unchecked(1.0, 1.0), 2.0),
            NamedForm::MaximalSurface => (OperatorParams::new_unchecked(-1.0, 1.0), 2.0),
            NamedForm::OneLaplace => (OperatorParams::new_unchecked(-1.0, 0.0), -2.0),
        }
    }
}

impl FromStr for NamedForm {
    type Err = OperatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedForm::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| OperatorError::UnknownForm(s.to_string()))
    }
}

pub fn named_form_residual(form: NamedForm, jet: &Jet2) -> f64 {
    let Jet2 {
        ux,
        uy,
        uxx,
        uxy,
        uyy,
        ..
    } = *jet;
    let ux2 = ux * ux;
    let uy2 = uy * uy;
    let cross = ux * uy * uxy;
    match form {
        NamedForm::MinimalSurface => (1.0 + uy2) * uxx - 2.0 * cross + (1.0 + ux2) * uyy,
        NamedForm::WrongMinimalSurface => (1.0 + ux2) * uxx + 2.0 * cross + (1.0 + uy2) * uyy,
        NamedForm::MaximalSurface => (1.0 - uy2) * uxx + 2.0 * cross + (1.0 - ux2) * uyy,
        NamedForm::OneLaplace => uy2 * uxx - 2.0 * cross + ux2 * uyy,
    }
}

/// Expanded `div(|Du|^{p-2} Du)`.
///
/// Where `Du = 0` the value is `Δu` for `p = 2`, `0` for `p > 2`, and an
/// error for `p < 2`.
pub fn p_laplace_residual(p: f64, jet: &Jet2) -> Result<f64, OperatorError> {
    let w = jet.w();
    if p == 2.0 {
        return Ok(jet.laplacian());
    }
    if w == 0.0 {
        return if p > 2.0 {
            Ok(0.0)
        } else {
            Err(OperatorError::SingularGradient { p })
        };
    }
    let scale = w.powf((p - 2.0) / 2.0);
    Ok(scale * (jet.laplacian() + (p - 2.0) * jet.hess_grad_grad() / w))
}

/// `sum_{j,k} u_j u_k u_jk` on `R^n`.
pub fn infinity_laplace_residual(jet: &JetN) -> f64 {
    let g = jet.grad();
    let n = jet.dim();
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            acc += g[j] * g[k] * jet.hess(j, k);
        }
    }
    acc
}

/// Both components of the 2D minimal surface system
/// `(1+|f_y|^2) f_xx - 2 (f_x . f_y) f_xy + (1+|f_x|^2) f_yy`.
pub fn mss_residual(mjet: &MapJet2) -> [f64; 2] {
    let fx = mjet.fx();
    let fy = mjet.fy();
    let fxx = mjet.fxx();
    let fxy = mjet.fxy();
    let fyy = mjet.fyy();
    let fx2 = fx[0] * fx[0] + fx[1] * fx[1];
    let fy2 = fy[0] * fy[0] + fy[1] * fy[1];
    let dot = fx[0] * fy[0] + fx[1] * fy[1];
    [0, 1].map(|i| (1.0 + fy2) * fxx[i] - 2.0 * dot * fxy[i] + (1.0 + fx2) * fyy[i])
}

pub const ELLIPTICITY_RULE: &str = "epsilon*gamma > 0 and |gamma| >= 1";

/// Gradient lattice used to sample the discriminant: `{-3, -2.75, ..., 3}^2`.
pub fn gradient_lattice() -> impl Iterator<Item = (f64, f64)> {
    let axis = || (0..=24).map(|k| -3.0 + 0.25 * k as f64);
    axis().flat_map(move |ux| axis().map(move |uy| (ux, uy)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub elliptic: bool,
    pub rule_source: String,
    /// Minimum of `4AC - B^2` over [`gradient_lattice`].
    pub sampled_min_discriminant: f64,
    /// Gradient at which the minimum is attained (first in lattice order).
    pub argmin_gradient: [f64; 2],
}

pub fn ellipticity(params: OperatorParams) -> EllipticityReport {
    let elliptic = params.epsilon * params.gamma > 0.0 && params.gamma.abs() >= 1.0;
    let (mut min, mut arg) = (f64::INFINITY, [0.0, 0.0]);
    for (ux, uy) in gradient_lattice() {
        let d = params.discriminant(ux, uy);
        if d < min {
            min = d;
            arg = [ux, uy];
        }
    }
    EllipticityReport {
        elliptic,
        rule_source: ELLIPTICITY_RULE.to_string(),
        sampled_min_discriminant: min,
        argmin_gradient: arg,
    }
}

/// `L_params[field]` at every point, in order.
pub fn l_residuals_at(
    exec: Execution,
    params: OperatorParams,
    field: &ScalarField2,
    points: &[Point2],
) -> Result<Vec<f64>, FieldError> {
    exec.try_map_indexed(points.len(), |i| {
        field.jet(points[i]).map(|j| l_residual(params, &j))
    })
}

/// Largest `|L_params[field]|` over the points.
pub fn max_abs_l_residual(
    exec: Execution,
    params: OperatorParams,
    field: &ScalarField2,
    points: &[Point2],
) -> Result<f64, FieldError> {
    Ok(l_residuals_at(exec, params, field, points)?
        .into_iter()
        .fold(0.0, |m, r| m.max(r.abs())))
}
