//! Executable checks for the qualitative theory, plus parameter studies.
//!
//! Everything here consumes the solver and the discrete oracle as black
//! boxes: bound checks on solutions, the inner-trace monotonicity and
//! saturation study, boundary-behavior classification, the
//! solver-vs-oracle agreement harness, and the seeded random problem
//! sweep used for cross-validation.

use crate::density::EnergyDensity;
use crate::error::{Error, Result};
use crate::oracle::{discrete_energy, minimize, weighted_l1, OracleConfig, OracleMode};
use crate::solver::{
    delta_m_infinity, profile_values_on, solve, RadialProblem, RadialSolution,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Outcome of a pointwise bound check; `witness` is a violating
/// `(r, u)` pair when the check fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub passed: bool,
    pub witness: Option<(f64, f64)>,
}

const BOUND_TOL: f64 = 1e-12;

/// Maximum principle: `sup |u| <= max(|m1|, |m2|)` on the stored grid.
pub fn check_max_principle(p: &RadialProblem, sol: &RadialSolution) -> BoundCheck {
    let bound = p.m1.abs().max(p.m2.abs());
    for n in &sol.profile {
        if n.u.abs() > bound + BOUND_TOL {
            return BoundCheck { passed: false, witness: Some((n.r, n.u)) };
        }
    }
    BoundCheck { passed: true, witness: None }
}

/// One-sided bound at the detached datum: after sign normalization the
/// profile never undershoots `m1` (`u >= m1` for rising data, mirrored
/// otherwise).
pub fn check_lower_bound(p: &RadialProblem, sol: &RadialSolution) -> BoundCheck {
    for n in &sol.profile {
        let violated = if sol.sign >= 0.0 {
            n.u < p.m1 - BOUND_TOL
        } else {
            n.u > p.m1 + BOUND_TOL
        };
        if violated {
            return BoundCheck { passed: false, witness: Some((n.r, n.u)) };
        }
    }
    BoundCheck { passed: true, witness: None }
}

/// Inner-trace response to a sweep of inner data `zeta < m2`.
#[derive(Debug, Clone)]
pub struct TraceStudy {
    pub zetas: Vec<f64>,
    /// `u_zeta(rho1)` per zeta.
    pub traces: Vec<f64>,
    pub attained: Vec<bool>,
    /// `m2 - delta_m_inf` when the gain supremum is finite.
    pub saturation_level: Option<f64>,
    /// Traces are non-decreasing in zeta.
    pub monotone: bool,
    /// Every saturated zeta produced the saturation trace and a profile
    /// identical (to 1e-9) to the other saturated ones.
    pub saturation_ok: bool,
    /// Empirical confirmation of `trace = max(zeta, m2 - delta_m_inf)`.
    pub max_formula_ok: bool,
    /// `0 <= trace(z2) - trace(z1) <= z2 - z1` held pairwise.
    pub lipschitz_upper_ok: bool,
}

const TRACE_TOL: f64 = 1e-9;

/// Solves the inner-penalty problem for every `zeta` and verifies the
/// monotonicity and saturation behavior of the inner trace.
pub fn trace_monotonicity_study(
    density: &EnergyDensity,
    rho1: f64,
    rho2: f64,
    m2: f64,
    zetas: &[f64],
) -> Result<TraceStudy> {
    if zetas.is_empty() {
        return Err(Error::Config("trace study needs at least one zeta".into()));
    }
    if zetas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("zetas must be strictly increasing".into()));
    }
    if zetas.iter().any(|&z| z >= m2) {
        return Err(Error::Config("every zeta must stay below m2".into()));
    }

    let template = RadialProblem::new(density.clone(), rho1, rho2, zetas[0], m2)?;
    let dmi = delta_m_infinity(&template)?;
    let saturation_level = if dmi.is_finite() { Some(m2 - dmi) } else { None };

    let mut traces = Vec::with_capacity(zetas.len());
    let mut attained = Vec::with_capacity(zetas.len());
    let mut first_saturated: Option<Vec<f64>> = None;
    let mut saturation_ok = true;

    for &zeta in zetas {
        let p = RadialProblem::new(density.clone(), rho1, rho2, zeta, m2)?;
        let sol = solve(&p)
            .map_err(|e| Error::Config(format!("trace study aborted at zeta = {zeta}: {e}")))?;
        traces.push(sol.trace_inner);
        attained.push(sol.attained_inner);

        if let Some(sat) = saturation_level {
            if zeta <= sat {
                if (sol.trace_inner - sat).abs() > TRACE_TOL {
                    saturation_ok = false;
                }
                let profile: Vec<f64> = sol.profile.iter().map(|n| n.u).collect();
                match &first_saturated {
                    None => first_saturated = Some(profile),
                    Some(reference) => {
                        let spread = profile
                            .iter()
                            .zip(reference)
                            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                        if spread > TRACE_TOL {
                            saturation_ok = false;
                        }
                    }
                }
            }
        }
    }

    let scale = 1.0 + traces.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let monotone = traces.windows(2).all(|w| w[1] >= w[0] - 1e-12 * scale);
    let lipschitz_upper_ok = traces
        .windows(2)
        .zip(zetas.windows(2))
        .all(|(t, z)| t[1] - t[0] <= (z[1] - z[0]) + 1e-9);
    let max_formula_ok = match saturation_level {
        Some(sat) => traces
            .iter()
            .zip(zetas)
            .all(|(t, &z)| (t - z.max(sat)).abs() <= 1e-8 * scale),
        None => traces
            .iter()
            .zip(zetas)
            .all(|(t, &z)| (t - z).abs() <= 1e-8 * scale),
    };

    Ok(TraceStudy {
        zetas: zetas.to_vec(),
        traces,
        attained,
        saturation_level,
        monotone,
        saturation_ok,
        max_formula_ok,
        lipschitz_upper_ok,
    })
}

/// Whether the inner datum is attained, and at what cost when it is not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryBehavior {
    Attained,
    NotAttained {
        /// The trace actually taken at `rho1`.
        trace_inner: f64,
        /// `|m2 - m1| - delta_m_inf`, the gap paid through the penalty.
        gap_paid: f64,
    },
}

/// Classifies boundary behavior from the gain supremum alone, using the
/// same decision rule as [`solve`].
pub fn classify_boundary_behavior(p: &RadialProblem) -> Result<BoundaryBehavior> {
    let gap = p.gap();
    if gap == 0.0 {
        return Ok(BoundaryBehavior::Attained);
    }
    let dmi = delta_m_infinity(p)?;
    if dmi > gap {
        Ok(BoundaryBehavior::Attained)
    } else {
        Ok(BoundaryBehavior::NotAttained {
            trace_inner: p.m2 - p.sign() * dmi,
            gap_paid: gap - dmi,
        })
    }
}

/// Pass thresholds for [`oracle_agreement`].
#[derive(Debug, Clone, Copy)]
pub struct AgreementThresholds {
    /// Node-aligned sup-norm bound.
    pub linf: f64,
    /// Relative energy-gap bound.
    pub energy_rel: f64,
}

impl Default for AgreementThresholds {
    fn default() -> Self {
        Self { linf: 5e-3, energy_rel: 1e-3 }
    }
}

/// Node-aligned distance between the semi-analytic solution and the
/// discrete minimizer, plus their (unsmoothed) energy gap.
#[derive(Debug, Clone, Copy)]
pub struct AgreementReport {
    pub linf: f64,
    /// Weighted L1 distance `2 pi int |u_h - u| r dr`.
    pub l1: f64,
    /// `|E_h - E| / max(|E|, 1e-12)`.
    pub energy_gap: f64,
    pub attained_inner: bool,
    pub passed: bool,
}

/// Runs both routes on the same problem and compares them.
pub fn oracle_agreement(
    p: &RadialProblem,
    cfg: &OracleConfig,
    thresholds: &AgreementThresholds,
) -> Result<AgreementReport> {
    if !matches!(cfg.mode, OracleMode::Relaxed) {
        return Err(Error::Config("oracle agreement compares against the relaxed mode".into()));
    }
    let sol = solve(p)?;
    let u_h = minimize(p, cfg)?;
    let u_ref = profile_values_on(p, sol.lambda, sol.sign, &u_h.nodes)?;

    let linf = u_h
        .values
        .iter()
        .zip(&u_ref)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let l1 = weighted_l1(&u_h.nodes, &u_h.values, &u_ref);
    let unsmoothed = OracleConfig { penalty_smoothing: 0.0, ..*cfg };
    let e_h = discrete_energy(p, &u_h, &unsmoothed)?;
    let energy_gap = (e_h - sol.energy.total).abs() / sol.energy.total.abs().max(1e-12);

    Ok(AgreementReport {
        linf,
        l1,
        energy_gap,
        attained_inner: sol.attained_inner,
        passed: linf <= thresholds.linf && energy_gap <= thresholds.energy_rel,
    })
}

/// One randomized problem of the cross-validation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCase {
    pub mu: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub m1: f64,
    pub m2: f64,
}

impl SweepCase {
    pub fn problem(&self) -> Result<RadialProblem> {
        RadialProblem::new(
            EnergyDensity::phi_mu(self.mu)?,
            self.rho1,
            self.rho2,
            self.m1,
            self.m2,
        )
    }
}

/// Seeded sweep distribution: `rho1 in [0.5, 2]`, `rho2/rho1 in [1.2, 4]`,
/// `mu in {1.5, 2, 2.5, 3, 4, 6}`, gaps in `[0, 3 rho2]` around a base
/// level in `[-1, 1]`, with random direction.
pub fn sweep_problems(seed: u64, count: usize) -> Vec<SweepCase> {
    const MUS: [f64; 6] = [1.5, 2.0, 2.5, 3.0, 4.0, 6.0];
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mu = MUS[rng.random_range(0..MUS.len())];
            let rho1 = rng.random_range(0.5..2.0);
            let rho2 = rho1 * rng.random_range(1.2..4.0);
            let gap = rng.random_range(0.0..3.0 * rho2);
            let base = rng.random_range(-1.0..1.0);
            let rising: bool = rng.random();
            let (m1, m2) = if rising { (base, base + gap) } else { (base + gap, base) };
            SweepCase { mu, rho1, rho2, m1, m2 }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_problem(mu: f64, rho1: f64, rho2: f64, m1: f64, m2: f64) -> RadialProblem {
        RadialProblem::new(EnergyDensity::phi_mu(mu).unwrap(), rho1, rho2, m1, m2).unwrap()
    }

    fn dmi_mu3() -> f64 {
        2f64.sqrt() - 1.0 + (1.0 + 2f64.sqrt()).ln()
    }

    #[test]
    fn max_principle_pass_and_witness() {
        let p = phi_problem(2.0, 1.0, 2.0, 3.0, 3.0);
        let sol = solve(&p).unwrap();
        assert!(check_max_principle(&p, &sol).passed);

        let p = phi_problem(2.0, 1.0, 2.0, 0.0, 1.0);
        let mut sol = solve(&p).unwrap();
        assert!(check_max_principle(&p, &sol).passed);
        sol.profile[100].u = p.m2 + 1.0;
        let report = check_max_principle(&p, &sol);
        assert!(!report.passed);
        let (r, u) = report.witness.unwrap();
        assert_eq!(r, sol.profile[100].r);
        assert_eq!(u, p.m2 + 1.0);
    }

    #[test]
    fn lower_bound_held_strictly_when_detached() {
        let p = phi_problem(3.0, 1.0, 2.0, 0.0, 2.0);
        let sol = solve(&p).unwrap();
        let report = check_lower_bound(&p, &sol);
        assert!(report.passed);
        assert!(sol.trace_inner > p.m1 + 0.5);

        // mirrored data: the reflected check
        let p = phi_problem(3.0, 1.0, 2.0, 2.0, 0.0);
        let sol = solve(&p).unwrap();
        assert!(check_lower_bound(&p, &sol).passed);
        assert!(sol.trace_inner < p.m1 - 0.5);
    }

    #[test]
    fn classification_matches_gain_supremum() {
        let p = phi_problem(3.0, 1.0, 2.0, 0.0, 1.0);
        assert_eq!(classify_boundary_behavior(&p).unwrap(), BoundaryBehavior::Attained);

        let p = phi_problem(3.0, 1.0, 2.0, 0.0, 2.0);
        match classify_boundary_behavior(&p).unwrap() {
            BoundaryBehavior::NotAttained { trace_inner, gap_paid } => {
                assert!((trace_inner - (2.0 - dmi_mu3())).abs() < 1e-9);
                assert!((gap_paid - (2.0 - dmi_mu3())).abs() < 1e-9);
            }
            other => panic!("expected detachment, got {other:?}"),
        }

        let p = phi_problem(3.0, 1.0, 2.0, 1.0, 1.0);
        assert_eq!(classify_boundary_behavior(&p).unwrap(), BoundaryBehavior::Attained);
    }

    #[test]
    fn trace_study_saturates_below_threshold() {
        let d = EnergyDensity::phi_mu(3.0).unwrap();
        let zetas = [-2.0, -1.0, -0.5, 0.0, 0.5];
        let study = trace_monotonicity_study(&d, 1.0, 2.0, 1.0, &zetas).unwrap();
        let sat = 1.0 - dmi_mu3();
        assert!((study.saturation_level.unwrap() - sat).abs() < 1e-9);
        for (&z, &t) in zetas.iter().zip(&study.traces) {
            assert!((t - z.max(sat)).abs() < 1e-8, "zeta {z}: trace {t}");
        }
        assert!(study.monotone);
        assert!(study.saturation_ok);
        assert!(study.max_formula_ok);
        assert!(study.lipschitz_upper_ok);
        assert_eq!(study.attained, vec![false, false, false, true, true]);
    }

    #[test]
    fn trace_study_all_attained_for_unbounded_gain() {
        let d = EnergyDensity::phi_mu(1.5).unwrap();
        let zetas = [-5.0, -1.0, 0.0, 0.9];
        let study = trace_monotonicity_study(&d, 1.0, 2.0, 1.0, &zetas).unwrap();
        assert!(study.saturation_level.is_none());
        assert!(study.attained.iter().all(|&a| a));
        for (&z, &t) in zetas.iter().zip(&study.traces) {
            assert!((t - z).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_study_small_gap() {
        let d = EnergyDensity::phi_mu(3.0).unwrap();
        let study = trace_monotonicity_study(&d, 1.0, 2.0, 1.0, &[1.0 - 0.01]).unwrap();
        assert!(study.attained[0]);
        assert!((study.traces[0] - 0.99).abs() < 1e-9);
    }

    #[test]
    fn trace_study_validates_input() {
        let d = EnergyDensity::phi_mu(3.0).unwrap();
        assert!(trace_monotonicity_study(&d, 1.0, 2.0, 1.0, &[]).is_err());
        assert!(trace_monotonicity_study(&d, 1.0, 2.0, 1.0, &[0.5, 0.2]).is_err());
        assert!(trace_monotonicity_study(&d, 1.0, 2.0, 1.0, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn agreement_on_constant_data() {
        let p = phi_problem(2.0, 1.0, 2.0, 1.0, 1.0);
        let cfg = OracleConfig { cells: 64, ..OracleConfig::default() };
        let report = oracle_agreement(&p, &cfg, &AgreementThresholds::default()).unwrap();
        assert!(report.passed);
        assert!(report.linf < 1e-7);
        assert_eq!(report.energy_gap, 0.0);
    }

    #[test]
    fn agreement_on_attained_benchmark() {
        let p = phi_problem(2.0, 1.0, 2.0, 0.0, 0.5 * 3f64.ln());
        let cfg = OracleConfig { cells: 512, ..OracleConfig::default() };
        let report = oracle_agreement(&p, &cfg, &AgreementThresholds::default()).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.attained_inner);
    }

    #[test]
    fn sweep_is_deterministic_and_in_range() {
        let a = sweep_problems(42, 20);
        let b = sweep_problems(42, 20);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        for case in &a {
            assert!((0.5..2.0).contains(&case.rho1));
            assert!(case.rho2 / case.rho1 >= 1.2 && case.rho2 / case.rho1 <= 4.0);
            assert!((case.m2 - case.m1).abs() <= 3.0 * case.rho2);
            case.problem().unwrap();
        }
        let c = sweep_problems(43, 20);
        assert_ne!(a, c);
    }
}
