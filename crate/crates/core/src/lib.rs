//! Analysis toolkit for the quasilinear family
//! `L_{gamma,eps}[u] = (2 eps + (gamma - 1)|Du|^2) Δu + 2 <D^2u Du, Du>`
//! on the plane: residual evaluation, ellipticity, variational densities,
//! Nitsche's divergence test, explicit entire solutions, a catalog of known
//! Bernstein-type results, and a finite-difference Dirichlet solver.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::redundant_guards
)]

pub mod banded;
pub mod constructions;
pub mod exec;
pub mod fields;
pub mod knowledge;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod variational;

pub use exec::Execution;
pub use fields::{Jet2, Point2, ScalarField2};
pub use operators::OperatorParams;

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_gap(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
