//! Linear-growth convex energy densities with controlled degeneracy.
//!
//! A density `g : [0, inf) -> [0, inf)` here is C^2, strictly convex,
//! normalized by `g(0) = g'(0) = 0`, of linear growth, and carries a
//! pair of ellipticity exponents `(mu, mu_bar)` describing the decay of
//! `g''`:
//!
//! ```text
//! nu1 (1+t)^(-mu) <= g''(t) <= nu2 (1+t)^(-mu_bar),   mu - mu_bar < 2.
//! ```
//!
//! The slope `g'` saturates at the recession slope `g'_inf`; how fast
//! it saturates (governed by `mu`) decides whether large boundary gaps
//! are attainable on an annulus. Everything downstream works with the
//! scalar `t = |grad u|`, so the 2D integrand `G(p) = g(|p|)` never
//! appears explicitly.
//!
//! Evaluation close to saturation is delicate: `g'_inf - g'(t)` can sit
//! far below the rounding error of `g'(t)` itself. Each family therefore
//! also exposes this *defect* in a cancellation-free form, together with
//! the inverse of `g'` parametrized by the defect.

use crate::error::{Error, Result};
use crate::quad;
use crate::roots;
use std::fmt;
use std::sync::Arc;

/// Shared handle for a user-supplied `psi = g''`.
pub type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative distance below the recession slope past which the pointwise
/// inverse of `g'` is refused; integrate up to the singular slope via
/// the improper-quadrature paths instead.
pub const INV_SLOPE_MARGIN: f64 = 1e-14;

/// Cap applied by profile builders when `(g')^-1` exceeds it.
pub const DU_CAP: f64 = 1e12;

const PSI_QUAD_REL: f64 = 1e-13;

#[derive(Clone)]
enum Family {
    PhiMu { mu: f64 },
    GTildeK { k: f64 },
    MinimalSurface,
    CustomPsi { psi: PsiFn, table: Arc<PsiTable> },
    Regularized { base: Box<EnergyDensity>, delta: f64, tau: f64 },
}

/// A linear-growth convex density together with its recession slope and
/// ellipticity exponents. Cheap to clone, immutable, thread-safe.
#[derive(Clone)]
pub struct EnergyDensity {
    family: Family,
    g_prime_inf: f64,
    g_prime_inf_estimated: bool,
    mu: f64,
    mu_bar: f64,
}

impl fmt::Debug for EnergyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::PhiMu { mu } => write!(f, "PhiMu {{ mu: {mu} }}"),
            Family::GTildeK { k } => write!(f, "GTildeK {{ k: {k} }}"),
            Family::MinimalSurface => write!(f, "MinimalSurface"),
            Family::CustomPsi { .. } => write!(
                f,
                "CustomPsi {{ mu: {}, mu_bar: {}, g_prime_inf: {} }}",
                self.mu, self.mu_bar, self.g_prime_inf
            ),
            Family::Regularized { base, delta, tau } => {
                write!(f, "Regularized {{ base: {base:?}, delta: {delta}, tau: {tau} }}")
            }
        }
    }
}

/// Tightest ellipticity constants certified on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityBounds {
    pub nu1: f64,
    pub nu2: f64,
}

// ---------------------------------------------------------------------------
// Phi_mu primitives, reused by the regularization shift.
// ---------------------------------------------------------------------------

fn phi(mu: f64, t: f64) -> f64 {
    if mu == 2.0 {
        t - t.ln_1p()
    } else {
        t - ((2.0 - mu) * t.ln_1p()).exp_m1() / (2.0 - mu)
    }
}

fn phi_prime(mu: f64, t: f64) -> f64 {
    -((1.0 - mu) * t.ln_1p()).exp_m1()
}

fn phi_second(mu: f64, t: f64) -> f64 {
    (mu - 1.0) * (-mu * t.ln_1p()).exp()
}

/// `1 - phi_mu'(t) = (1+t)^(1-mu)`, exact near saturation.
fn phi_defect(mu: f64, t: f64) -> f64 {
    ((1.0 - mu) * t.ln_1p()).exp()
}

/// Inverse slope from the defect: `t` with `(1+t)^(1-mu) = d`.
fn phi_inv_from_defect(mu: f64, d: f64) -> f64 {
    (-d.ln() / (mu - 1.0)).exp_m1()
}

// ---------------------------------------------------------------------------
// g~_k primitives.
// ---------------------------------------------------------------------------

fn gt(k: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let a = k * t.ln();
    if a > 700.0 {
        // (1+t^k)^(1/k) = t * exp(ln(1 + t^-k)/k) without overflow
        t * ((-a).exp().ln_1p() / k).exp() - 1.0
    } else {
        (t.powf(k).ln_1p() / k).exp_m1()
    }
}

fn gt_prime(k: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if t <= 1.0 {
        t.powf(k - 1.0) * (1.0 + t.powf(k)).powf((1.0 - k) / k)
    } else {
        (-(k - 1.0) / k * t.powf(-k).ln_1p()).exp()
    }
}

fn gt_second(k: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if k == 2.0 {
            1.0
        } else if k > 2.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if t <= 1.0 {
        (k - 1.0) * t.powf(k - 2.0) * (1.0 + t.powf(k)).powf(1.0 / k - 2.0)
    } else {
        (k - 1.0) * t.powf(-k - 1.0) * (1.0 + t.powf(-k)).powf((1.0 - 2.0 * k) / k)
    }
}

fn gt_defect(k: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let z = (k - 1.0) / k * t.powf(-k).ln_1p();
    -(-z).exp_m1()
}

fn gt_inv_from_defect(k: f64, d: f64) -> f64 {
    let s = 1.0 - d;
    if s <= 0.0 {
        return 0.0;
    }
    // z = s^(k/(k-1));  t = (z / (1-z))^(1/k)
    let ln_z = k / (k - 1.0) * (-d).ln_1p();
    let one_minus_z = -ln_z.exp_m1();
    ((ln_z - one_minus_z.ln()) / k).exp()
}

// ---------------------------------------------------------------------------
// Minimal surface primitives.
// ---------------------------------------------------------------------------

fn ms(t: f64) -> f64 {
    if t > 1.0 {
        t.hypot(1.0) - 1.0
    } else {
        t * t / (1.0 + t.hypot(1.0))
    }
}

fn ms_prime(t: f64) -> f64 {
    t / t.hypot(1.0)
}

fn ms_second(t: f64) -> f64 {
    let gamma = t.hypot(1.0);
    (1.0 / gamma).powi(3)
}

fn ms_defect(t: f64) -> f64 {
    if t > 1e100 {
        return 0.5 / (t * t);
    }
    let gamma = t.hypot(1.0);
    1.0 / (gamma * (gamma + t))
}

fn ms_inv_from_defect(d: f64) -> f64 {
    (1.0 - d) / (d * (2.0 - d)).sqrt()
}

// ---------------------------------------------------------------------------
// Cached antiderivatives for user-supplied psi.
// ---------------------------------------------------------------------------

/// Cumulative integrals of `psi` and of `g'` on a fixed geometric
/// breakpoint ladder. Evaluation anchors at the breakpoint below the
/// query and integrates only the short remainder, so accuracy is set by
/// the quadrature tolerance, not by interpolation.
struct PsiTable {
    breakpoints: Vec<f64>,
    cum_psi: Vec<f64>,
    cum_gp: Vec<f64>,
}

impl PsiTable {
    fn build(psi: &PsiFn) -> Result<Self> {
        let mut breakpoints = vec![0.0f64];
        for e in -20..=48 {
            breakpoints.push(2f64.powi(e));
        }
        let n = breakpoints.len();

        let mut cum_psi = vec![0.0f64; n];
        for i in 1..n {
            let q = quad::integrate(psi.as_ref(), breakpoints[i - 1], breakpoints[i], PSI_QUAD_REL, 1e-300, 4000)?;
            cum_psi[i] = cum_psi[i - 1] + q.value;
        }

        let mut cum_gp = vec![0.0f64; n];
        for i in 1..n {
            let gp = |s: f64| Self::gp_with(&breakpoints, &cum_psi, psi, s);
            let q = quad::integrate(&gp, breakpoints[i - 1], breakpoints[i], PSI_QUAD_REL, 1e-300, 4000)?;
            cum_gp[i] = cum_gp[i - 1] + q.value;
        }

        Ok(Self { breakpoints, cum_psi, cum_gp })
    }

    fn anchor(breakpoints: &[f64], t: f64) -> usize {
        match breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    fn gp_with(breakpoints: &[f64], cum_psi: &[f64], psi: &PsiFn, t: f64) -> f64 {
        let i = Self::anchor(breakpoints, t);
        let tail = quad::integrate(psi.as_ref(), breakpoints[i], t, PSI_QUAD_REL, 1e-300, 4000)
            .map(|q| q.value)
            .unwrap_or(f64::NAN);
        cum_psi[i] + tail
    }

    fn g_prime(&self, psi: &PsiFn, t: f64) -> f64 {
        Self::gp_with(&self.breakpoints, &self.cum_psi, psi, t)
    }

    fn g(&self, psi: &PsiFn, t: f64) -> f64 {
        let i = Self::anchor(&self.breakpoints, t);
        let gp = |s: f64| self.g_prime(psi, s);
        let tail = quad::integrate(&gp, self.breakpoints[i], t, PSI_QUAD_REL, 1e-300, 4000)
            .map(|q| q.value)
            .unwrap_or(f64::NAN);
        self.cum_gp[i] + tail
    }
}

// ---------------------------------------------------------------------------

impl EnergyDensity {
    /// `Phi_mu(t) = (mu-1) int_0^t int_0^s (1+r)^-mu dr ds`, `mu > 1`.
    pub fn phi_mu(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 1.0) {
            return Err(Error::InvalidDensity(format!("phi_mu requires mu > 1, got {mu}")));
        }
        Ok(Self {
            family: Family::PhiMu { mu },
            g_prime_inf: 1.0,
            g_prime_inf_estimated: false,
            mu,
            mu_bar: mu,
        })
    }

    /// `(1 + t^k)^(1/k) - 1`, `k > 1`; elliptic with exponent `k + 1`.
    pub fn g_tilde_k(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 1.0) {
            return Err(Error::InvalidDensity(format!("g_tilde_k requires k > 1, got {k}")));
        }
        Ok(Self {
            family: Family::GTildeK { k },
            g_prime_inf: 1.0,
            g_prime_inf_estimated: false,
            mu: k + 1.0,
            mu_bar: k + 1.0,
        })
    }

    /// `sqrt(1 + t^2) - 1`; elliptic with `mu = mu_bar = 3`.
    pub fn minimal_surface() -> Self {
        Self {
            family: Family::MinimalSurface,
            g_prime_inf: 1.0,
            g_prime_inf_estimated: false,
            mu: 3.0,
            mu_bar: 3.0,
        }
    }

    /// Density with `g'' = psi` built by repeated quadrature of a
    /// user-supplied continuous `psi` bounded between `c1 (1+t)^-mu`
    /// and `c2 (1+t)^-mu_bar`. The recession slope is estimated by
    /// extrapolating `g'` and flagged as such.
    pub fn custom_psi(psi: PsiFn, mu: f64, mu_bar: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 1.0) {
            return Err(Error::InvalidDensity(format!("custom_psi requires mu > 1, got {mu}")));
        }
        if !(mu_bar.is_finite() && (1.0..=mu).contains(&mu_bar)) {
            return Err(Error::InvalidDensity(format!(
                "custom_psi requires mu_bar in [1, mu], got {mu_bar}"
            )));
        }
        if mu - mu_bar >= 2.0 {
            return Err(Error::InvalidDensity(format!(
                "ellipticity window violated: mu - mu_bar = {} must stay below 2",
                mu - mu_bar
            )));
        }
        for &t in &[0.0, 0.5, 1.0, 10.0, 1e4, 1e8] {
            let v = psi(t);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidDensity(format!(
                    "psi must be positive and finite; psi({t}) = {v}"
                )));
            }
        }
        let table = Arc::new(PsiTable::build(&psi)?);

        // Aitken extrapolation of g'(T), g'(10T), g'(100T).
        let a0 = table.g_prime(&psi, 1e12);
        let a1 = table.g_prime(&psi, 1e13);
        let a2 = table.g_prime(&psi, 1e14);
        let (d1, d2) = (a1 - a0, a2 - a1);
        let g_prime_inf = if (d2 - d1).abs() <= 1e-15 * a2.abs() {
            a2
        } else {
            a2 - d2 * d2 / (d2 - d1)
        };
        if !(g_prime_inf.is_finite() && g_prime_inf > 0.0) {
            return Err(Error::InvalidDensity(format!(
                "estimated recession slope is not positive finite: {g_prime_inf}"
            )));
        }

        Ok(Self {
            family: Family::CustomPsi { psi, table },
            g_prime_inf,
            g_prime_inf_estimated: true,
            mu,
            mu_bar,
        })
    }

    /// Regularized density `g_delta = delta * Phi_tau + g`.
    ///
    /// `tau` must satisfy `tau > 1`, `tau > mu - 1` and `tau < mu_bar`
    /// of the base density; the result is two-sided `tau`-elliptic.
    pub fn regularized(base: EnergyDensity, delta: f64, tau: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        let lo = (base.mu - 1.0).max(1.0);
        let hi = base.mu_bar;
        if !(tau > lo && tau < hi) {
            return Err(Error::Domain(format!(
                "tau = {tau} outside the admissible window ({lo}, {hi}) for this base density"
            )));
        }
        let g_prime_inf = delta + base.g_prime_inf;
        let estimated = base.g_prime_inf_estimated;
        Ok(Self {
            family: Family::Regularized { base: Box::new(base), delta, tau },
            g_prime_inf,
            g_prime_inf_estimated: estimated,
            mu: tau,
            mu_bar: tau,
        })
    }

    /// Midpoint of the admissible regularization window, if nonempty.
    pub fn default_tau(&self) -> Option<f64> {
        let lo = (self.mu - 1.0).max(1.0);
        let hi = self.mu_bar;
        if lo < hi {
            Some(0.5 * (lo + hi))
        } else {
            None
        }
    }

    pub fn g_prime_inf(&self) -> f64 {
        self.g_prime_inf
    }

    /// True when the recession slope was extrapolated numerically
    /// rather than known in closed form.
    pub fn g_prime_inf_estimated(&self) -> bool {
        self.g_prime_inf_estimated
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mu_bar(&self) -> f64 {
        self.mu_bar
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Domain(format!("gradient magnitude must be finite and >= 0, got {t}")));
        }
        Ok(())
    }

    /// `g(t)`.
    pub fn g(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.g_raw(t))
    }

    /// `g'(t)`; strictly increasing, bounded by the recession slope.
    pub fn g_prime(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.g_prime_raw(t))
    }

    /// `g''(t)`.
    pub fn g_second(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.g_second_raw(t))
    }

    pub(crate) fn g_raw(&self, t: f64) -> f64 {
        match &self.family {
            Family::PhiMu { mu } => phi(*mu, t),
            Family::GTildeK { k } => gt(*k, t),
            Family::MinimalSurface => ms(t),
            Family::CustomPsi { psi, table } => table.g(psi, t),
            Family::Regularized { base, delta, tau } => delta * phi(*tau, t) + base.g_raw(t),
        }
    }

    pub(crate) fn g_prime_raw(&self, t: f64) -> f64 {
        match &self.family {
            Family::PhiMu { mu } => phi_prime(*mu, t),
            Family::GTildeK { k } => gt_prime(*k, t),
            Family::MinimalSurface => ms_prime(t),
            Family::CustomPsi { psi, table } => table.g_prime(psi, t),
            Family::Regularized { base, delta, tau } => delta * phi_prime(*tau, t) + base.g_prime_raw(t),
        }
    }

    pub(crate) fn g_second_raw(&self, t: f64) -> f64 {
        match &self.family {
            Family::PhiMu { mu } => phi_second(*mu, t),
            Family::GTildeK { k } => gt_second(*k, t),
            Family::MinimalSurface => ms_second(t),
            Family::CustomPsi { psi, .. } => psi(t),
            Family::Regularized { base, delta, tau } => {
                delta * phi_second(*tau, t) + base.g_second_raw(t)
            }
        }
    }

    /// Saturation defect `g'_inf - g'(t)` in a cancellation-free form.
    ///
    /// Closed-form families evaluate the defect directly; quadrature
    /// families fall back to the difference and inherit its rounding.
    pub fn g_prime_defect(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.g_prime_defect_raw(t))
    }

    pub(crate) fn g_prime_defect_raw(&self, t: f64) -> f64 {
        match &self.family {
            Family::PhiMu { mu } => phi_defect(*mu, t),
            Family::GTildeK { k } => gt_defect(*k, t),
            Family::MinimalSurface => ms_defect(t),
            Family::CustomPsi { .. } => (self.g_prime_inf - self.g_prime_raw(t)).max(0.0),
            Family::Regularized { base, delta, tau } => {
                delta * phi_defect(*tau, t) + base.g_prime_defect_raw(t)
            }
        }
    }

    /// The unique `t >= 0` with `g'(t) = s`.
    ///
    /// Refused for `s >= g'_inf (1 - 1e-14)`: the inverse blows up at
    /// the recession slope, and callers that need the singular limit
    /// integrate up to it instead of evaluating at it.
    pub fn inv_g_prime(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!("slope must be finite and >= 0, got {s}")));
        }
        if s >= self.g_prime_inf * (1.0 - INV_SLOPE_MARGIN) {
            return Err(Error::Domain(format!(
                "slope {s} at or beyond the recession slope {}",
                self.g_prime_inf
            )));
        }
        Ok(self.inv_from_defect_raw(self.g_prime_inf - s))
    }

    /// Inverse slope parametrized by the defect `d = g'_inf - g'(t)`;
    /// well-conditioned arbitrarily close to saturation.
    pub fn inv_g_prime_from_defect(&self, d: f64) -> Result<f64> {
        if !(d.is_finite() && d > 0.0 && d <= self.g_prime_inf) {
            return Err(Error::Domain(format!(
                "defect must lie in (0, g'_inf = {}], got {d}",
                self.g_prime_inf
            )));
        }
        Ok(self.inv_from_defect_raw(d))
    }

    pub(crate) fn inv_from_defect_raw(&self, d: f64) -> f64 {
        match &self.family {
            Family::PhiMu { mu } => phi_inv_from_defect(*mu, d),
            Family::GTildeK { k } => gt_inv_from_defect(*k, d),
            Family::MinimalSurface => ms_inv_from_defect(d),
            Family::CustomPsi { .. } | Family::Regularized { .. } => self.inv_defect_bracketed(d),
        }
    }

    /// Monotone bracketing solve of `g'_inf - g'(t) = d` in `ln(1+t)`.
    fn inv_defect_bracketed(&self, d: f64) -> f64 {
        let h = |u: f64| self.g_prime_defect_raw(u.exp_m1()) - d;
        if h(0.0) <= 0.0 {
            return 0.0;
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let u_max = 700.0;
        while h(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > u_max {
                // Defect unresolvable below t = e^700; effectively saturated.
                return f64::MAX;
            }
        }
        roots::brent(&h, lo, hi, 1e-13, 1e-13, 300)
            .map(|u| u.exp_m1())
            .unwrap_or(f64::MAX)
    }

    /// Tightest constants for the two-sided bound
    /// `nu1 (1+t)^(-mu) <= g''(t) <= nu2 (1+t)^(-mu_bar)`
    /// on a grid, for this density's own exponent pair.
    pub fn verify_ellipticity(&self, grid: &[f64]) -> Result<EllipticityBounds> {
        self.verify_ellipticity_for(self.mu, self.mu_bar, grid)
    }

    /// Same, for an arbitrary claimed exponent pair.
    pub fn verify_ellipticity_for(&self, mu: f64, mu_bar: f64, grid: &[f64]) -> Result<EllipticityBounds> {
        if grid.is_empty() {
            return Err(Error::Domain("ellipticity grid must be nonempty".into()));
        }
        for w in grid.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Domain("ellipticity grid must be nondecreasing".into()));
            }
        }
        let mut nu1 = f64::INFINITY;
        let mut nu2 = f64::NEG_INFINITY;
        for &t in grid {
            self.check_t(t)?;
            let gpp = self.g_second_raw(t);
            let lo = gpp * (mu * t.ln_1p()).exp();
            let hi = gpp * (mu_bar * t.ln_1p()).exp();
            nu1 = nu1.min(lo);
            nu2 = nu2.max(hi);
        }
        if !(nu1.is_finite() && nu1 > 0.0 && nu2.is_finite() && nu2 > 0.0) {
            return Err(Error::Ellipticity(format!(
                "claimed exponents ({mu}, {mu_bar}) not certified: nu1 = {nu1:.6e}, nu2 = {nu2:.6e}"
            )));
        }
        Ok(EllipticityBounds { nu1, nu2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        // independent plain bisection used as a test oracle
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn phi_mu_values() {
        let d = EnergyDensity::phi_mu(2.0).unwrap();
        assert_eq!(d.g(0.0).unwrap(), 0.0);
        assert!((d.g(1.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);

        let d3 = EnergyDensity::phi_mu(3.0).unwrap();
        assert_eq!(d3.g_prime(0.0).unwrap(), 0.0);
        assert!((d3.g_prime(1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((d.g_second(1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn minimal_surface_values() {
        let d = EnergyDensity::minimal_surface();
        assert!((d.g(1.0).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(d.g(0.0).unwrap(), 0.0);
        assert_eq!(d.g_prime_inf(), 1.0);
    }

    #[test]
    fn g_tilde_values() {
        let d = EnergyDensity::g_tilde_k(2.0).unwrap();
        assert!((d.g(3.0).unwrap() - (10f64.sqrt() - 1.0)).abs() < 1e-14);
        // cross-check against the derivative route: g(3) = int_0^3 g'
        let q = quad::integrate(&|t: f64| d.g_prime(t).unwrap(), 0.0, 3.0, 1e-13, 0.0, 4000).unwrap();
        assert!((d.g(3.0).unwrap() - q.value).abs() < 1e-11);
        // k = 2 coincides with the minimal surface density
        let ms = EnergyDensity::minimal_surface();
        for &t in &[0.1, 1.0, 7.5, 300.0] {
            assert!((d.g(t).unwrap() - ms.g(t).unwrap()).abs() < 1e-13 * (1.0 + t));
            assert!((d.g_second(t).unwrap() - ms.g_second(t).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_slope() {
        let d2 = EnergyDensity::phi_mu(2.0).unwrap();
        assert_eq!(d2.inv_g_prime(0.0).unwrap(), 0.0);
        // oracle: solve t/(1+t) = 1/2 by bisection
        let t_star = bisect_root(|t| t / (1.0 + t) - 0.5, 0.0, 10.0);
        assert!((t_star - 1.0).abs() < 1e-12);
        assert!((d2.inv_g_prime(0.5).unwrap() - t_star).abs() < 1e-12);

        let ms = EnergyDensity::minimal_surface();
        let s = 1.0 / 2f64.sqrt();
        let t_star = bisect_root(|t| t / (1.0 + t * t).sqrt() - s, 0.0, 10.0);
        assert!((t_star - 1.0).abs() < 1e-12);
        assert!((ms.inv_g_prime(s).unwrap() - t_star).abs() < 1e-12);

        let gt = EnergyDensity::g_tilde_k(2.0).unwrap();
        assert!((gt.inv_g_prime(s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_domain_errors() {
        let d = EnergyDensity::phi_mu(3.0).unwrap();
        assert!(d.inv_g_prime(-0.1).is_err());
        assert!(d.inv_g_prime(1.0).is_err());
        assert!(d.inv_g_prime(1.0 - 1e-15).is_err());
        assert!(d.inv_g_prime(1.0 - 1e-13).is_ok());
        assert!(d.g(-1.0).is_err());
    }

    #[test]
    fn ellipticity_phi_mu_exact() {
        let d = EnergyDensity::phi_mu(3.0).unwrap();
        let b = d.verify_ellipticity(&[0.0, 1.0, 10.0, 100.0]).unwrap();
        assert!((b.nu1 - 2.0).abs() < 1e-12);
        assert!((b.nu2 - 2.0).abs() < 1e-12);

        // weaker upper exponent always certifiable, nu2 peaks at t = 0
        let b = d.verify_ellipticity_for(3.0, 1.0, &[0.0, 0.5, 2.0, 50.0]).unwrap();
        assert!((b.nu2 - 2.0).abs() < 1e-12);
        assert!(b.nu1 <= b.nu2 + 1e-12);
    }

    #[test]
    fn ellipticity_g_tilde() {
        let d = EnergyDensity::g_tilde_k(2.0).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| 1000f64.powf(i as f64 / 199.0) - 1.0).collect();
        let b = d.verify_ellipticity_for(3.0, 3.0, &grid).unwrap();
        assert!(b.nu1 > 0.0 && b.nu2.is_finite());
        assert!(b.nu1 <= b.nu2);
        // (1+t)^3 (1+t^2)^(-3/2) >= 1 with equality at t = 0
        assert!((b.nu1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipticity_failure_for_flat_density() {
        // g~_3 has g''(0) = 0, so no positive nu1 exists on grids containing 0.
        let d = EnergyDensity::g_tilde_k(3.0).unwrap();
        assert!(d.verify_ellipticity(&[0.0, 1.0, 10.0]).is_err());
        // away from zero the exponent pair certifies
        assert!(d.verify_ellipticity(&[0.01, 1.0, 10.0]).is_ok());
    }

    #[test]
    fn regularized_window_and_values() {
        let base = EnergyDensity::phi_mu(3.0).unwrap();
        // window is (2, 3); the midpoint default
        assert_eq!(base.default_tau(), Some(2.5));
        assert!(EnergyDensity::regularized(base.clone(), 0.5, 1.9).is_err());
        assert!(EnergyDensity::regularized(base.clone(), 0.5, 3.0).is_err());
        assert!(EnergyDensity::regularized(base.clone(), 1.5, 2.5).is_err());

        let reg = EnergyDensity::regularized(base.clone(), 0.5, 2.5).unwrap();
        // g_delta''(0) = delta (tau - 1) + g''(0)
        assert!((reg.g_second(0.0).unwrap() - (0.5 * 1.5 + 2.0)).abs() < 1e-14);
        assert_eq!(reg.g_prime_inf(), 1.5);
        assert_eq!(reg.mu(), 2.5);

        // delta -> 0 limit approaches the base pointwise
        let small = EnergyDensity::regularized(base.clone(), 1e-9, 2.5).unwrap();
        for &t in &[0.0, 0.3, 1.0, 20.0, 1e4] {
            let diff = (small.g(t).unwrap() - base.g(t).unwrap()).abs();
            assert!(diff <= 1e-8 * (1.0 + t), "diff {diff} at t = {t}");
        }
    }

    #[test]
    fn regularized_two_sided_tau_bounds() {
        let base = EnergyDensity::g_tilde_k(2.0).unwrap(); // mu = 3
        let reg = EnergyDensity::regularized(base, 0.1, 2.5).unwrap();
        let grid: Vec<f64> = (0..100).map(|i| 100f64.powf(i as f64 / 99.0) - 1.0).collect();
        let b = reg.verify_ellipticity_for(2.5, 2.5, &grid).unwrap();
        assert!(b.nu1 >= 0.1 * 1.5 - 1e-12);
        assert!(b.nu2.is_finite());
    }

    #[test]
    fn custom_psi_reproduces_phi_mu() {
        let psi: PsiFn = Arc::new(|t: f64| 2.0 * (1.0 + t).powi(-3));
        let d = EnergyDensity::custom_psi(psi, 3.0, 3.0).unwrap();
        let reference = EnergyDensity::phi_mu(3.0).unwrap();
        for &t in &[0.0, 0.25, 1.0, 8.0, 120.0] {
            assert!((d.g(t).unwrap() - reference.g(t).unwrap()).abs() < 1e-9 * (1.0 + t));
            assert!((d.g_prime(t).unwrap() - reference.g_prime(t).unwrap()).abs() < 1e-10);
            let gpp = reference.g_second(t).unwrap();
            assert!((d.g_second(t).unwrap() - gpp).abs() < 1e-14 * (1.0 + gpp));
        }
        assert!(d.g_prime_inf_estimated());
        assert!((d.g_prime_inf() - 1.0).abs() < 1e-6);
        // bracketed inverse round-trips
        for &t in &[0.1, 1.0, 30.0] {
            let s = d.g_prime(t).unwrap();
            assert!((d.inv_g_prime(s).unwrap() - t).abs() < 1e-9 * t.max(1.0));
        }
    }

    #[test]
    fn custom_psi_mixture_recession_slope() {
        let psi: PsiFn = Arc::new(|t: f64| (1.0 + t).powf(-2.5) + (1.0 + t).powi(-3));
        let d = EnergyDensity::custom_psi(psi, 3.0, 2.5).unwrap();
        // int_0^inf psi = 1/1.5 + 1/2 = 7/6
        assert!((d.g_prime_inf() - 7.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn custom_psi_rejects_bad_input() {
        let psi: PsiFn = Arc::new(|t: f64| 1.0 - t); // negative past t = 1
        assert!(EnergyDensity::custom_psi(psi, 3.0, 3.0).is_err());
        let ok: PsiFn = Arc::new(|t: f64| (1.0 + t).powi(-4));
        assert!(EnergyDensity::custom_psi(ok.clone(), 4.0, 1.5).is_err()); // mu - mu_bar >= 2
        assert!(EnergyDensity::custom_psi(ok, 0.9, 0.9).is_err());
    }

    #[test]
    fn densities_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<EnergyDensity>();
        assert_send_sync::<crate::solver::RadialSolution>();
        assert_send_sync::<crate::oracle::DiscreteRadialFunction>();

        let d = std::sync::Arc::new(
            EnergyDensity::custom_psi(Arc::new(|t: f64| 2.0 * (1.0 + t).powi(-3)), 3.0, 3.0).unwrap(),
        );
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let d = d.clone();
                std::thread::spawn(move || d.g(1.0 + i as f64).unwrap())
            })
            .collect();
        for h in handles {
            assert!(h.join().unwrap() > 0.0);
        }
    }

    #[test]
    fn slope_saturates_at_recession() {
        for d in [
            EnergyDensity::phi_mu(1.5).unwrap(),
            EnergyDensity::phi_mu(2.0).unwrap(),
            EnergyDensity::phi_mu(3.0).unwrap(),
            EnergyDensity::g_tilde_k(2.0).unwrap(),
            EnergyDensity::g_tilde_k(3.0).unwrap(),
        ] {
            let defect = d.g_prime_defect(1e12).unwrap();
            assert!(defect <= 1e-6 + 1e-12, "defect {defect} for {d:?}");
            assert!(defect > 0.0);
        }
    }
}
