//! Variational densities `F(|Du|^2)` whose Euler–Lagrange equations are
//! members of the family, the Nitsche divergence criterion, and the
//! correspondence between `gamma` and the p-Laplace exponent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::fields::Jet2;
use crate::operators::OperatorParams;
use crate::quadrature::{Quadrature, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationalError {
    #[error("no variational density is available for {0}")]
    Inadmissible(OperatorParams),
    #[error("the density for {0} is degenerate at w = 0; the divergence criterion needs a regular integral")]
    NotRegular(OperatorParams),
    #[error("pole: 2*epsilon + (gamma - 1)*w vanishes at w = {w}")]
    Pole { w: f64 },
    #[error("w = {w} is outside the density's domain")]
    Domain { w: f64 },
    #[error("p = 2 corresponds to gamma -> infinity, not a finite gamma")]
    NoFiniteGamma,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum DensityCase {
    /// `(2|eps| + |gamma-1| w)^(gamma/(gamma-1))`, for `gamma > 1, eps > 0`
    /// or `gamma <= -1, eps < 0`.
    Power { exponent: f64 },
    /// `exp(w / (2 eps))`, for `gamma = 1, eps > 0`.
    Exponential,
    /// `(|gamma-1| w)^(gamma/(gamma-1)) = c(p) |Du|^p / p`, for `eps = 0`,
    /// `|gamma| > 1`.
    PPower { exponent: f64, p: f64, c_p: f64 },
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalDensity {
    pub params: OperatorParams,
    pub case: DensityCase,
}

/// The density for `params`, if the parameters belong to one of the three
/// families that have one.
pub fn density(params: OperatorParams) -> Result<VariationalDensity, VariationalError> {
    let OperatorParams { gamma, epsilon } = params;
    let exponent = gamma / (gamma - 1.0);
    let case = if (gamma > 1.0 && epsilon > 0.0) || (gamma <= -1.0 && epsilon < 0.0) {
        DensityCase::Power { exponent }
    } else if gamma == 1.0 && epsilon > 0.0 {
        DensityCase::Exponential
    } else if epsilon == 0.0 && gamma.abs() > 1.0 {
        let p = 2.0 * exponent;
        DensityCase::PPower {
            exponent,
            p,
            c_p: p * (gamma - 1.0).abs().powf(exponent),
        }
    } else {
        return Err(VariationalError::Inadmissible(params));
    };
    Ok(VariationalDensity { params, case })
}

impl VariationalDensity {
    // base, base', exponent of the power cases
    fn power_parts(&self, w: f64) -> (f64, f64, f64) {
        let k = (self.params.gamma - 1.0).abs();
        match self.case {
            DensityCase::Power { exponent } => {
                (2.0 * self.params.epsilon.abs() + k * w, k, exponent)
            }
            DensityCase::PPower { exponent, .. } => (k * w, k, exponent),
            DensityCase::Exponential => unreachable!(),
        }
    }

    /// `[F(w), F'(w), F''(w)]`.
    pub fn derivatives(&self, w: f64) -> Result<[f64; 3], VariationalError> {
        if !(w >= 0.0) {
            return Err(VariationalError::Domain { w });
        }
        let out = match self.case {
            DensityCase::Exponential => {
                let s = 1.0 / (2.0 * self.params.epsilon);
                let f = (w * s).exp();
                [f, f * s, f * s * s]
            }
            _ => {
                let (base, k, q) = self.power_parts(w);
                [
                    base.powf(q),
                    q * k * base.powf(q - 1.0),
                    q * (q - 1.0) * k * k * base.powf(q - 2.0),
                ]
            }
        };
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(VariationalError::Domain { w })
        }
    }

    pub fn value(&self, w: f64) -> Result<f64, VariationalError> {
        Ok(self.derivatives(w)?[0])
    }

    /// `2 F'' / F'` from the density itself.
    pub fn lambda_from_derivatives(&self, w: f64) -> Result<f64, VariationalError> {
        let [_, d1, d2] = self.derivatives(w)?;
        Ok(2.0 * d2 / d1)
    }
}

/// `lambda(w) = 2 / (2 eps + (gamma - 1) w)`.
pub fn lambda_value(params: OperatorParams, w: f64) -> Result<f64, VariationalError> {
    let denom = 2.0 * params.epsilon + (params.gamma - 1.0) * w;
    if denom == 0.0 {
        return Err(VariationalError::Pole { w });
    }
    Ok(2.0 / denom)
}

/// `(1 + w lambda) / (2 + w lambda) / w`.
pub fn nitsche_integrand(params: OperatorParams, w: f64) -> Result<f64, VariationalError> {
    if !(w > 0.0) {
        return Err(VariationalError::Domain { w });
    }
    let t = w * lambda_value(params, w)?;
    if 2.0 + t == 0.0 {
        return Err(VariationalError::Pole { w });
    }
    Ok((1.0 + t) / (2.0 + t) / w)
}

/// `(1/(2 eps + gamma w) + 1/w) / 2`, equal to [`nitsche_integrand`] on the
/// family.
pub fn nitsche_integrand_reduced(params: OperatorParams, w: f64) -> Result<f64, VariationalError> {
    let d = 2.0 * params.epsilon + params.gamma * w;
    if d == 0.0 {
        return Err(VariationalError::Pole { w });
    }
    if !(w > 0.0) {
        return Err(VariationalError::Domain { w });
    }
    Ok(0.5 * (1.0 / d + 1.0 / w))
}

/// Antiderivative of the reduced integrand.
pub fn nitsche_antiderivative(params: OperatorParams, w: f64) -> f64 {
    let OperatorParams { gamma, epsilon } = params;
    if gamma == 0.0 {
        w / (4.0 * epsilon) + 0.5 * w.ln()
    } else {
        0.5 * ((2.0 * epsilon + gamma * w).abs().ln() / gamma + w.ln())
    }
}

/// `lim_{w -> inf} w * integrand(w)`.
pub fn tail_coefficient(params: OperatorParams) -> f64 {
    let g = params.gamma;
    if g == 0.0 {
        // integrand tends to 1/(4 eps), not O(1/w)
        f64::INFINITY
    } else {
        (g + 1.0) / (2.0 * g)
    }
}

pub const NITSCHE_CUTOFFS: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];

/// Last-over-first partial integral ratio that counts as unbounded growth.
pub const DIVERGENCE_RATIO: f64 = 2.0;

/// Last increment over first increment below which the partials count as a
/// plateau.
pub const PLATEAU_RATIO: f64 = 0.1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NitscheVerdict {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernsteinConclusion {
    NoBernsteinProperty,
    CriterionSilent,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialIntegral {
    pub cutoff: f64,
    /// Adaptive quadrature of the integrand over `[1, cutoff]`.
    pub value: f64,
    pub quadrature_error: f64,
    /// Same integral from the antiderivative.
    pub closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NitscheReport {
    pub params: OperatorParams,
    pub verdict: NitscheVerdict,
    pub tail_coefficient: f64,
    pub partial_integrals: Vec<PartialIntegral>,
    /// Least-squares slope of the partials against `ln W`.
    pub growth_slope: f64,
    /// Whether the numeric partials look the way the verdict says they should.
    pub corroborated: bool,
    pub bernstein_conclusion: BernsteinConclusion,
}

/// Decides divergence of the Nitsche integral from the closed-form tail and
/// attaches quadrature evidence.
pub fn nitsche_verdict(params: OperatorParams) -> Result<NitscheReport, VariationalError> {
    nitsche_verdict_with(params, &Quadrature::default(), Execution::default())
}

pub fn nitsche_verdict_with(
    params: OperatorParams,
    quad: &Quadrature,
    exec: Execution,
) -> Result<NitscheReport, VariationalError> {
    if let DensityCase::PPower { .. } = density(params)?.case {
        return Err(VariationalError::NotRegular(params));
    }
    let tail = tail_coefficient(params);
    let verdict = if !tail.is_finite() {
        NitscheVerdict::Inconclusive
    } else if tail != 0.0 {
        NitscheVerdict::Diverges
    } else {
        NitscheVerdict::Converges
    };

    let mut edges = vec![1.0];
    edges.extend_from_slice(&NITSCHE_CUTOFFS);
    let pieces = exec.try_map_indexed(NITSCHE_CUTOFFS.len(), |i| {
        let f = |w: f64| nitsche_integrand(params, w).unwrap_or(f64::NAN);
        quad.integrate(f, edges[i], edges[i + 1])
    })?;
    let base = nitsche_antiderivative(params, 1.0);
    let mut running = (0.0, 0.0);
    let partial_integrals: Vec<PartialIntegral> = pieces
        .iter()
        .zip(NITSCHE_CUTOFFS)
        .map(|(est, cutoff)| {
            running.0 += est.value;
            running.1 += est.error;
            PartialIntegral {
                cutoff,
                value: running.0,
                quadrature_error: running.1,
                closed_form: nitsche_antiderivative(params, cutoff) - base,
            }
        })
        .collect();

    let growth_slope = log_slope(&partial_integrals);
    let values: Vec<f64> = partial_integrals.iter().map(|p| p.value).collect();
    let increasing = values.windows(2).all(|w| w[1] > w[0]) && values[0] > 0.0;
    let corroborated = match verdict {
        NitscheVerdict::Diverges => {
            increasing && values[values.len() - 1] / values[0] > DIVERGENCE_RATIO
        }
        NitscheVerdict::Converges => {
            let first = values[1] - values[0];
            let last = values[values.len() - 1] - values[values.len() - 2];
            increasing && last <= PLATEAU_RATIO * first
        }
        NitscheVerdict::Inconclusive => false,
    };

    Ok(NitscheReport {
        params,
        verdict,
        tail_coefficient: tail,
        partial_integrals,
        growth_slope,
        corroborated,
        bernstein_conclusion: if verdict == NitscheVerdict::Diverges {
            BernsteinConclusion::NoBernsteinProperty
        } else {
            BernsteinConclusion::CriterionSilent
        },
    })
}

fn log_slope(parts: &[PartialIntegral]) -> f64 {
    let n = parts.len() as f64;
    let xs: Vec<f64> = parts.iter().map(|p| p.cutoff.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = parts.iter().map(|p| p.value).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, p) in xs.iter().zip(parts) {
        sxy += (x - mx) * (p.value - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Expanded Euler–Lagrange operator of `∫ F(|Du|^2)`:
/// `2 F'(w) Δu + 4 F''(w) <D^2u Du, Du>`.
pub fn el_residual(params: OperatorParams, jet: &Jet2) -> Result<f64, VariationalError> {
    let d = density(params)?;
    let [_, d1, d2] = d.derivatives(jet.w())?;
    Ok(2.0 * d1 * jet.laplacian() + 4.0 * d2 * jet.hess_grad_grad())
}

/// A p-Laplace exponent; `gamma = 1` maps to `p = +inf`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PExponent {
    Finite(f64),
    Infinite,
}

/// `p = 2 gamma / (gamma - 1)`.
pub fn gamma_to_p(gamma: f64) -> PExponent {
    if gamma == 1.0 {
        PExponent::Infinite
    } else {
        PExponent::Finite(2.0 * gamma / (gamma - 1.0))
    }
}

/// `gamma = p / (p - 2)`.
///
/// Among the floats within a few ulps of the quotient, returns the one with
/// the shortest mantissa that `gamma_to_p` maps back to `p` exactly, so both
/// round trips are exact on ordinary inputs.
pub fn p_to_gamma(p: PExponent) -> Result<f64, VariationalError> {
    let p = match p {
        PExponent::Infinite => return Ok(1.0),
        PExponent::Finite(p) if p == 2.0 => return Err(VariationalError::NoFiniteGamma),
        PExponent::Finite(p) => p,
    };
    let g = p / (p - 2.0);
    if !g.is_finite() {
        return Ok(g);
    }
    let mut best: Option<f64> = None;
    for k in -4i64..=4 {
        let c = f64::from_bits((g.to_bits() as i64 + k) as u64);
        if c.signum() != g.signum() || gamma_to_p(c) != PExponent::Finite(p) {
            continue;
        }
        if best.is_none_or(|b| c.to_bits().trailing_zeros() > b.to_bits().trailing_zeros()) {
            best = Some(c);
        }
    }
    Ok(best.unwrap_or(g))
}
