//! Semi-analytic solver for the relaxed radial problem.
//!
//! On the annulus `rho1 < |x| < rho2` every radial stationary point of
//! the relaxed energy satisfies flux constancy
//!
//! ```text
//! r g'(|u'(r)|) = lambda,        0 <= lambda <= rho1 g'_inf,
//! ```
//!
//! so the whole solution is parametrized by the single flux constant
//! `lambda`. The solver calibrates `lambda` against the boundary gap
//! through the height gain
//!
//! ```text
//! delta_m(lambda) = int_rho1^rho2 (g')^{-1}(lambda / r) dr,
//! ```
//!
//! classifies whether the inner datum is attained (it is iff the gap
//! stays below the supremum `delta_m_inf` of achievable gains), and
//! builds the profile by backward integration from the outer anchor
//! `(rho2, m2)`, where the boundary data are always respected. When the
//! gap exceeds `delta_m_inf` the minimizer detaches at the inner circle
//! and pays the deficit through the boundary penalty term.

use crate::density::{EnergyDensity, DU_CAP, INV_SLOPE_MARGIN};
use crate::error::{Error, Result};
use crate::grid::graded_grid;
use crate::quad;

/// Default node count of the stored profile grid.
pub const DEFAULT_PROFILE_CELLS: usize = 512;

/// Relative tolerance for all solver quadratures.
pub const QUAD_REL: f64 = 1e-13;

/// Maximum bisection steps when calibrating the flux constant. The
/// bracket exhausts to floating-point resolution well before this, so a
/// separate secant polish never has anything left to do.
pub const BISECT_MAX_ITER: usize = 200;

/// A radial problem instance: annulus, boundary data, density.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub rho1: f64,
    pub rho2: f64,
    pub m1: f64,
    pub m2: f64,
    pub density: EnergyDensity,
}

impl RadialProblem {
    pub fn new(density: EnergyDensity, rho1: f64, rho2: f64, m1: f64, m2: f64) -> Result<Self> {
        if !(rho1.is_finite() && rho2.is_finite() && 0.0 < rho1 && rho1 < rho2) {
            return Err(Error::InvalidProblem(format!(
                "annulus radii must satisfy 0 < rho1 < rho2, got ({rho1}, {rho2})"
            )));
        }
        if !(m1.is_finite() && m2.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "boundary data must be finite, got ({m1}, {m2})"
            )));
        }
        Ok(Self { rho1, rho2, m1, m2, density })
    }

    /// Absolute boundary gap `|m2 - m1|`.
    pub fn gap(&self) -> f64 {
        (self.m2 - self.m1).abs()
    }

    /// Monotonicity direction: `+1` when `m2 >= m1`, else `-1`.
    pub fn sign(&self) -> f64 {
        if self.m2 >= self.m1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Largest admissible flux constant `rho1 * g'_inf`.
    pub fn lambda_max(&self) -> f64 {
        self.rho1 * self.density.g_prime_inf()
    }
}

/// One node of the stored profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileNode {
    pub r: f64,
    pub u: f64,
    /// Radial derivative; capped at `+-DU_CAP` where the slope inverse
    /// blows up (then `du_capped` is set).
    pub du: f64,
    pub du_capped: bool,
}

/// Bulk / singular / boundary-penalty decomposition of the relaxed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `2 pi int g(|u'|) r dr`
    pub bulk: f64,
    /// Singular-part contribution; zero for the profiles produced here.
    pub singular: f64,
    /// `g'_inf 2 pi rho1 |trace_inner - m1|`
    pub penalty_inner: f64,
    /// Always zero: the outer datum is respected.
    pub penalty_outer: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub const ZERO: Self = Self {
        bulk: 0.0,
        singular: 0.0,
        penalty_inner: 0.0,
        penalty_outer: 0.0,
        total: 0.0,
    };
}

/// Generalized minimizer of the relaxed radial problem.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    /// Flux constant, `0 <= lambda <= rho1 g'_inf`.
    pub lambda: f64,
    /// Direction of monotonicity, sign of `m2 - m1` (`+1` for `m1 = m2`).
    pub sign: f64,
    /// Whether the trace at `rho1` equals the prescribed `m1`.
    pub attained_inner: bool,
    /// `u(rho1+)`; equals `m1` iff `attained_inner`.
    pub trace_inner: f64,
    /// `u(rho2-)`; always equals `m2`.
    pub trace_outer: f64,
    /// Supremum of achievable height gains (`+inf` when unbounded).
    pub delta_m_infinity: f64,
    /// Profile sampled on a grid graded toward `rho1`.
    pub profile: Vec<ProfileNode>,
    pub energy: EnergyBreakdown,
}

/// Flux-equation integrand in offset coordinates `x = r - rho1`.
///
/// The saturation defect `g'_inf - lambda/r` is carried as
/// `(g'_inf x + c0) / (rho1 + x)` with `c0 = g'_inf rho1 - lambda`, so
/// it stays exact even when `lambda/r` is unrepresentably close to the
/// recession slope.
struct FluxSlope<'a> {
    density: &'a EnergyDensity,
    gpi: f64,
    rho1: f64,
    c0: f64,
}

impl<'a> FluxSlope<'a> {
    fn new(p: &'a RadialProblem, lambda: f64) -> Self {
        let gpi = p.density.g_prime_inf();
        Self {
            density: &p.density,
            gpi,
            rho1: p.rho1,
            c0: gpi * p.rho1 - lambda,
        }
    }

    fn defect(&self, x: f64) -> f64 {
        (self.gpi * x + self.c0) / (self.rho1 + x)
    }

    /// `|u'|` at offset `x`, unbounded as the defect vanishes.
    fn du(&self, x: f64) -> f64 {
        self.density.inv_from_defect_raw(self.defect(x))
    }

    /// `|u'|` with the cap applied; returns `(value, capped)`.
    fn du_capped(&self, x: f64) -> (f64, bool) {
        let d = self.defect(x);
        if d <= self.gpi * INV_SLOPE_MARGIN {
            return (DU_CAP, true);
        }
        let t = self.density.inv_from_defect_raw(d);
        if t > DU_CAP {
            (DU_CAP, true)
        } else {
            (t, false)
        }
    }
}

fn is_singular_flux(p: &RadialProblem, lambda: f64) -> bool {
    let lam_max = p.lambda_max();
    lam_max - lambda <= 4.0 * f64::EPSILON * lam_max
}

/// Height gain `delta_m(lambda) = int_rho1^rho2 (g')^{-1}(lambda/r) dr`.
///
/// At `lambda = rho1 g'_inf` the integrand has a power-type endpoint
/// singularity at `rho1`; it is integrated in dyadic shells and the
/// `+inf` sentinel is returned when the shell sums are classified
/// divergent.
pub fn delta_m(p: &RadialProblem, lambda: f64) -> Result<f64> {
    let lam_max = p.lambda_max();
    if !lambda.is_finite() || lambda < 0.0 || lambda > lam_max * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "flux constant must lie in [0, {lam_max:.6e}], got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let flux = FluxSlope::new(p, lambda.min(lam_max));
    let width = p.rho2 - p.rho1;
    let f = |x: f64| flux.du(x);
    if is_singular_flux(p, lambda) {
        let q = quad::integrate_singular_lower(&f, 0.0, width, QUAD_REL)?;
        Ok(q.value)
    } else {
        Ok(quad::integrate(&f, 0.0, width, QUAD_REL, 1e-300, 20_000)?.value)
    }
}

/// Supremum of achievable height gains, `delta_m` at the extreme flux.
/// Returns `f64::INFINITY` when the boundary gap is unconstrained.
pub fn delta_m_infinity(p: &RadialProblem) -> Result<f64> {
    delta_m(p, p.lambda_max())
}

/// Calibrates `lambda` so that `delta_m(lambda) = gap`, assuming
/// `gap < delta_m_infinity`. Bisection on `[0, lambda_max]`, run to
/// floating-point exhaustion of the bracket.
fn bisect_lambda(p: &RadialProblem, gap: f64, dmi: f64) -> Result<f64> {
    let lam_max = p.lambda_max();
    let mut lo = 0.0f64;
    let mut f_lo = 0.0f64;
    let mut hi = lam_max;
    let mut f_hi = dmi;

    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = delta_m(p, mid)?;
        if f < gap {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    // The bracket is a few ulps wide; pick the endpoint with the
    // smaller residual (lo whenever hi is still the singular flux).
    if (f_lo - gap).abs() <= (f_hi - gap).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// Cumulative backward integration of the profile on `nodes`
/// (increasing, spanning `[rho1, rho2]`), anchored at `(rho2, m2)`.
pub(crate) fn profile_values_on(
    p: &RadialProblem,
    lambda: f64,
    sign: f64,
    nodes: &[f64],
) -> Result<Vec<f64>> {
    let n = nodes.len() - 1;
    let mut u = vec![0.0f64; n + 1];
    u[n] = p.m2;
    if lambda == 0.0 {
        for v in u.iter_mut() {
            *v = p.m2;
        }
        return Ok(u);
    }
    let flux = FluxSlope::new(p, lambda);
    let singular = is_singular_flux(p, lambda);
    let f = |x: f64| flux.du(x);
    for i in (0..n).rev() {
        let a = nodes[i] - p.rho1;
        let b = nodes[i + 1] - p.rho1;
        let cell = if i == 0 && singular {
            let q = quad::integrate_singular_lower(&f, 0.0, b, QUAD_REL)?;
            if q.divergent {
                return Err(Error::Quadrature(
                    "divergent height gain encountered while building a profile".into(),
                ));
            }
            q.value
        } else {
            quad::integrate(&f, a, b, QUAD_REL, 1e-300, 20_000)?.value
        };
        u[i] = u[i + 1] - sign * cell;
    }
    Ok(u)
}

fn build_profile(
    p: &RadialProblem,
    lambda: f64,
    sign: f64,
    cells: usize,
) -> Result<Vec<ProfileNode>> {
    let nodes = graded_grid(p.rho1, p.rho2, cells);
    let u = profile_values_on(p, lambda, sign, &nodes)?;
    let flux = FluxSlope::new(p, lambda);
    let profile = nodes
        .iter()
        .zip(u)
        .map(|(&r, u)| {
            if lambda == 0.0 {
                ProfileNode { r, u, du: 0.0, du_capped: false }
            } else {
                let (t, capped) = flux.du_capped(r - p.rho1);
                ProfileNode { r, u, du: sign * t, du_capped: capped }
            }
        })
        .collect();
    Ok(profile)
}

/// Solves the relaxed problem on the default profile grid.
pub fn solve(p: &RadialProblem) -> Result<RadialSolution> {
    solve_with_grid(p, DEFAULT_PROFILE_CELLS)
}

/// Solves the relaxed problem, storing the profile on `cells` graded cells.
pub fn solve_with_grid(p: &RadialProblem, cells: usize) -> Result<RadialSolution> {
    if cells == 0 {
        return Err(Error::Config("profile grid needs at least one cell".into()));
    }
    let gap = p.gap();
    let sign = p.sign();
    let dmi = delta_m_infinity(p)?;

    let (lambda, attained) = if gap == 0.0 {
        (0.0, true)
    } else if dmi > gap {
        (bisect_lambda(p, gap, dmi)?, true)
    } else {
        (p.lambda_max(), false)
    };

    let mut profile = build_profile(p, lambda, sign, cells)?;
    if attained {
        // The inner datum is met exactly in the limit; pin it so the
        // trace is free of the residual quadrature/bisection noise.
        profile[0].u = p.m1;
    }
    let trace_inner = profile[0].u;

    let mut sol = RadialSolution {
        lambda,
        sign,
        attained_inner: attained,
        trace_inner,
        trace_outer: p.m2,
        delta_m_infinity: dmi,
        profile,
        energy: EnergyBreakdown::ZERO,
    };
    sol.energy = energy(p, &sol)?;
    Ok(sol)
}

/// Relaxed energy of a solution: bulk term by adaptive quadrature
/// (endpoint-singularity aware), penalties from the traces.
pub fn energy(p: &RadialProblem, sol: &RadialSolution) -> Result<EnergyBreakdown> {
    let gpi = p.density.g_prime_inf();
    let two_pi = 2.0 * std::f64::consts::PI;

    let bulk = if sol.lambda == 0.0 {
        0.0
    } else {
        let flux = FluxSlope::new(p, sol.lambda);
        let width = p.rho2 - p.rho1;
        let f = |x: f64| p.density.g_raw(flux.du(x)) * (p.rho1 + x);
        let v = if is_singular_flux(p, sol.lambda) {
            let q = quad::integrate_singular_lower(&f, 0.0, width, QUAD_REL)?;
            if q.divergent {
                return Err(Error::Quadrature("bulk energy integral diverged".into()));
            }
            q.value
        } else {
            quad::integrate(&f, 0.0, width, QUAD_REL, 1e-300, 20_000)?.value
        };
        two_pi * v
    };

    let penalty_inner = gpi * two_pi * p.rho1 * (sol.trace_inner - p.m1).abs();
    let penalty_outer = gpi * two_pi * p.rho2 * (sol.trace_outer - p.m2).abs();
    let singular = 0.0;
    Ok(EnergyBreakdown {
        bulk,
        singular,
        penalty_inner,
        penalty_outer,
        total: bulk + singular + penalty_inner + penalty_outer,
    })
}

/// Profile value and derivative at an arbitrary radius, recomputed by
/// quadrature from the outer anchor (consistent with the stored grid).
pub fn profile_at(sol: &RadialSolution, p: &RadialProblem, r: f64) -> Result<(f64, f64)> {
    let tol = 1e-12 * p.rho2;
    if !(r.is_finite() && r >= p.rho1 - tol && r <= p.rho2 + tol) {
        return Err(Error::Domain(format!(
            "radius {r} outside the annulus [{}, {}]",
            p.rho1, p.rho2
        )));
    }
    let r = r.clamp(p.rho1, p.rho2);
    if sol.lambda == 0.0 {
        return Ok((p.m2, 0.0));
    }
    let flux = FluxSlope::new(p, sol.lambda);
    let x = r - p.rho1;
    let width = p.rho2 - p.rho1;
    let f = |x: f64| flux.du(x);
    let rise = if x >= width {
        0.0
    } else if x == 0.0 && is_singular_flux(p, sol.lambda) {
        let q = quad::integrate_singular_lower(&f, 0.0, width, QUAD_REL)?;
        q.value
    } else {
        quad::integrate(&f, x, width, QUAD_REL, 1e-300, 20_000)?.value
    };
    let (t, _) = flux.du_capped(x);
    Ok((p.m2 - sol.sign * rise, sol.sign * t))
}

/// The special exponents whose flux profiles integrate in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormMu {
    /// `mu = 3/2`
    ThreeHalves,
    /// `mu = 2`
    Two,
    /// `mu = 3`
    Three,
}

impl ClosedFormMu {
    pub fn value(self) -> f64 {
        match self {
            ClosedFormMu::ThreeHalves => 1.5,
            ClosedFormMu::Two => 2.0,
            ClosedFormMu::Three => 3.0,
        }
    }
}

/// Closed-form antiderivative of `(g')^{-1}(lambda/s)` for the three
/// special exponents, normalized to vanish at `rho2`. Used as a golden
/// cross-check for [`profile_at`].
///
/// The `mu = 3` antiderivative is derived independently:
/// `sqrt(r(r-lambda)) - r + lambda ln(sqrt(r) + sqrt(r-lambda))`.
pub fn closed_form_profile(mu: ClosedFormMu, lambda: f64, r: f64, rho2: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let anti = |r: f64| -> Result<f64> {
        match mu {
            ClosedFormMu::ThreeHalves => {
                if r <= lambda {
                    return Err(Error::Domain(format!("radius {r} at or below the singular radius {lambda}")));
                }
                Ok(2.0 * lambda * (r - lambda).ln() - lambda * lambda / (r - lambda))
            }
            ClosedFormMu::Two => {
                if r <= lambda {
                    return Err(Error::Domain(format!("radius {r} at or below the singular radius {lambda}")));
                }
                Ok(lambda * (r - lambda).ln())
            }
            ClosedFormMu::Three => {
                if r < lambda {
                    return Err(Error::Domain(format!("radius {r} below the singular radius {lambda}")));
                }
                Ok((r * (r - lambda)).sqrt() - r + lambda * (r.sqrt() + (r - lambda).sqrt()).ln())
            }
        }
    };
    Ok(anti(r)? - anti(rho2)?)
}
