//! Crate-wide error type.

use crate::oracle::DiscreteRadialFunction;

/// Errors produced by the density, solver, oracle and analysis layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation
    /// (negative gradient magnitude, slope at or past the recession
    /// slope, radius outside the annulus, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Density parameters violate the admissibility conditions.
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    /// Problem data violate the annulus/boundary-data invariants.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// The claimed ellipticity exponents could not be certified on the
    /// supplied grid.
    #[error("ellipticity verification failed: {0}")]
    Ellipticity(String),

    /// Adaptive quadrature exhausted its interval budget before the
    /// requested tolerance was met.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Scalar root finding failed (no sign change, iteration budget).
    #[error("root finding failed: {0}")]
    RootFind(String),

    /// The discrete minimizer stopped without meeting its convergence
    /// certificate. The best iterate and a first-order bound on the
    /// remaining energy gap are attached for diagnosis.
    #[error("minimization did not converge: {detail} (best energy {best_energy:.6e}, gap estimate {gap_estimate:.3e})")]
    NonConvergence {
        detail: String,
        best_energy: f64,
        gap_estimate: f64,
        best: Box<DiscreteRadialFunction>,
    },

    /// Invalid configuration of an operation (oracle mode, study input).
    #[error("configuration error: {0}")]
    Config(String),

    /// A discrete function does not live on the grid implied by the
    /// oracle configuration.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
