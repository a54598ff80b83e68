//! Radially symmetric variational problems with linear-growth convex
//! energy densities on a planar annulus.
//!
//! The library computes the generalized (relaxed) minimizer of
//!
//! ```text
//! int_Omega g(|grad u|) dx  ->  min,    u = m_i on {|x| = rho_i},
//! ```
//!
//! semi-analytically through flux constancy of the radial Euler
//! equation, classifies whether the inner boundary datum is attained,
//! and cross-validates every answer against an independent discrete
//! minimizer of the relaxed functional that knows nothing about the
//! flux structure.
//!
//! Module map:
//!
//! * [`density`]   - admissible energy densities `g` and pointwise ops
//! * [`solver`]    - flux calibration, attainment, profiles, energies
//! * [`oracle`]    - discrete minimization of the relaxed functional
//! * [`analysis`]  - qualitative checks, trace studies, agreement harness
//! * [`suite`]     - the end-to-end verification checklist
//! * [`quad`], [`roots`], [`grid`] - shared numerical kernels

pub mod analysis;
pub mod density;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod solver;
pub mod suite;

pub use analysis::{
    check_lower_bound, check_max_principle, classify_boundary_behavior, oracle_agreement,
    sweep_problems, trace_monotonicity_study, AgreementReport, AgreementThresholds, BoundCheck,
    BoundaryBehavior, SweepCase, TraceStudy,
};
pub use density::{EllipticityBounds, EnergyDensity, PsiFn};
pub use error::{Error, Result};
pub use oracle::{
    discrete_energy, minimize, minimize_from, regularization_study, DiscreteRadialFunction,
    OracleConfig, OracleMode, RegStudyPoint,
};
pub use solver::{
    closed_form_profile, delta_m, delta_m_infinity, energy, profile_at, solve, solve_with_grid,
    ClosedFormMu, EnergyBreakdown, ProfileNode, RadialProblem, RadialSolution,
};
