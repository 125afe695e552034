//! Time maps of the planar pendulum system x' = y, y' = -sin 2x.
//!
//! Orbits are level sets of the energy V(x, y) = y² - cos 2x. Three transit
//! times are needed to assemble boundary value solutions:
//!
//! ```text
//! T(α)      = ∫₀^α  dx / √(cos 2x - cos 2α)          quarter period of γ_α
//! T1(α, φ)  = ∫₀^φ  dx / √(cos 2x - cos 2α)          y-axis to the line x = φ
//! T2(β, φ)  = ∫₀^φ  dx / √(β² + cos 2x - 1)          same, above the separatrix
//! ```
//!
//! The closed-orbit maps are evaluated after the substitution
//! sin x = sin α · sin θ, which removes the turning-point singularity and
//! leaves bounded integrands on [0, θ_φ]; T2 is evaluated after factoring out
//! β. Everything here is a pure function of its arguments.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, dyadic_seeds};

/// Arguments closer than this are treated as coincident in `time_to_line`,
/// where the transformed upper limit arcsin(sin φ / sin α) is ill-conditioned.
pub const COINCIDENT_EPS: f64 = 1e-10;

/// Problem instance: Dirichlet angles x(-L) = -φ0, x(L) = φ1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    phi0: f64,
    phi1: f64,
}

impl CellParams {
    /// Both angles must lie in (0, π/2).
    pub fn new(phi0: f64, phi1: f64) -> Result<Self> {
        for (name, v) in [("phi0", phi0), ("phi1", phi1)] {
            if !(v > 0.0 && v < FRAC_PI_2) {
                return Err(Error::domain(format!(
                    "{name} = {v} must lie in (0, pi/2)"
                )));
            }
        }
        Ok(CellParams { phi0, phi1 })
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi_min(&self) -> f64 {
        self.phi0.min(self.phi1)
    }

    pub fn phi_max(&self) -> f64 {
        self.phi0.max(self.phi1)
    }

    /// True for the orientation φ0 ≤ φ1 in which the branch formulas are
    /// usually drawn; the opposite orientation is its mirror image.
    pub fn is_canonical(&self) -> bool {
        self.phi0 <= self.phi1
    }

    pub fn is_symmetric(&self) -> bool {
        self.phi0 == self.phi1
    }

    /// The mirrored cell (φ1, φ0). Solutions map to solutions under
    /// x ↦ -x, t ↦ -t, which swaps the endpoint ordinates:
    /// y'(-L) = y(L), y'(L) = y(-L).
    pub fn mirror(&self) -> CellParams {
        CellParams {
            phi0: self.phi1,
            phi1: self.phi0,
        }
    }
}

/// Which side of the separatrix an orbit lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Periodic orbit through (α, 0) with α ∈ (0, π/2); energy in (-1, 1).
    Closed,
    /// Running orbit crossing the y-axis at (0, β) with β ≥ √2; energy ≥ 1.
    Open,
}

/// Energy-level coordinate of an orbit: amplitude α below the separatrix,
/// crossing height β on or above it. The energy E = y² - cos 2x is cached;
/// E = -cos 2α resp. E = β² - 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitParam {
    regime: Regime,
    value: f64,
    energy: f64,
}

impl OrbitParam {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < FRAC_PI_2) {
            return Err(Error::domain(format!(
                "alpha = {alpha} must lie in (0, pi/2)"
            )));
        }
        Ok(OrbitParam {
            regime: Regime::Closed,
            value: alpha,
            energy: -(2.0 * alpha).cos(),
        })
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta >= SQRT_2) {
            return Err(Error::domain(format!("beta = {beta} must be >= sqrt(2)")));
        }
        Ok(OrbitParam {
            regime: Regime::Open,
            value: beta,
            energy: beta * beta - 1.0,
        })
    }

    /// Level-set coordinate from the energy; E < 1 selects the closed regime.
    pub fn from_energy(energy: f64) -> Result<Self> {
        if energy >= 1.0 {
            OrbitParam::from_beta((energy + 1.0).sqrt())
        } else {
            if !(energy > -1.0) {
                return Err(Error::domain(format!(
                    "energy = {energy} must exceed -1"
                )));
            }
            // E = 2 sin^2 alpha - 1
            let alpha = ((0.5 * (energy + 1.0)).sqrt()).asin();
            OrbitParam::from_alpha(alpha)
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.regime {
            Regime::Closed => Some(self.value),
            Regime::Open => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.regime {
            Regime::Open => Some(self.value),
            Regime::Closed => None,
        }
    }

    /// Raw coordinate: α for closed orbits, β for open ones.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// sin²α for closed orbits; the convexity variable of the branch times.
    pub fn alpha_tilde(&self) -> Option<f64> {
        self.alpha().map(|a| {
            let s = a.sin();
            s * s
        })
    }
}

/// Accuracy budget for all kernel evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Largest admissible α; T diverges logarithmically at π/2, so sweeps
    /// must stop short of it.
    pub alpha_cap: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_subdivisions: 60,
            alpha_cap: FRAC_PI_2 - 1e-9,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if !(self.alpha_cap < FRAC_PI_2) {
            return Err(Error::domain("alpha_cap must be below pi/2"));
        }
        Ok(())
    }

    fn run<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        seeds: &[f64],
        what: &str,
    ) -> Result<f64> {
        quad::integrate(f, a, b, seeds, self.rel_tol, self.abs_tol, self.max_subdivisions)
            .map(|q| q.value)
            .ok_or_else(|| {
                Error::convergence(format!(
                    "{what} did not converge within {} subdivisions",
                    self.max_subdivisions
                ))
            })
    }
}

/// β = √2 sin α: the y-axis crossing height of the closed orbit γ_α.
pub fn beta_of_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "alpha = {alpha} must lie in (0, pi/2)"
        )));
    }
    Ok(SQRT_2 * alpha.sin())
}

/// α(β) = arcsin(β/√2): the amplitude of the closed orbit crossing at (0, β).
pub fn alpha_of_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < SQRT_2) {
        return Err(Error::domain(format!(
            "beta = {beta} must lie in (0, sqrt(2)); no closed orbit otherwise"
        )));
    }
    Ok((beta / SQRT_2).asin())
}

/// Transformed time-map integrand after sin x = sin α sin θ and the flip
/// u = π/2 - θ: 1/√(sin²u + cos²α cos²u). The radicand is a sum of squares
/// (no cancellation), and the boundary layer of width cos α sits at u = 0,
/// where the floating-point grid is dense.
fn complete_integrand(cos_alpha: f64) -> impl Fn(f64) -> f64 {
    move |u: f64| {
        let (s, c) = u.sin_cos();
        1.0 / (s * s + (cos_alpha * c) * (cos_alpha * c)).sqrt()
    }
}

fn boundary_layer_seeds(cos_alpha: f64, lo: f64) -> Vec<f64> {
    dyadic_seeds(0.0, FRAC_PI_2, cos_alpha.abs().max(1e-18), lo, FRAC_PI_2)
}

/// Quarter period T(α) of the closed orbit γ_α.
///
/// Strictly increasing, T → π/(2√2) as α → 0 and T → ∞ as α → π/2.
pub fn quarter_period(alpha: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= cfg.alpha_cap) {
        return Err(Error::domain(format!(
            "alpha = {alpha} outside (0, alpha_cap = {}]",
            cfg.alpha_cap
        )));
    }
    let ca = alpha.cos();
    let f = complete_integrand(ca);
    let seeds = boundary_layer_seeds(ca, 0.0);
    Ok(cfg.run(&f, 0.0, FRAC_PI_2, &seeds, "quarter_period")? / SQRT_2)
}

/// T1(α, φ): time from the y-axis crossing of γ_α to the line x = φ ≤ α.
///
/// T1(φ, φ) = T(φ); arguments within `COINCIDENT_EPS` take that path.
pub fn time_to_line(alpha: f64, phi: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(phi > 0.0 && alpha > 0.0) {
        return Err(Error::domain("time_to_line needs positive angles"));
    }
    if alpha > cfg.alpha_cap {
        return Err(Error::domain(format!(
            "alpha = {alpha} above alpha_cap = {}",
            cfg.alpha_cap
        )));
    }
    if (alpha - phi).abs() < COINCIDENT_EPS {
        return quarter_period(phi, cfg);
    }
    if phi > alpha {
        return Err(Error::domain(format!(
            "phi = {phi} exceeds alpha = {alpha}"
        )));
    }
    let ca = alpha.cos();
    // flipped lower limit: u_lo = pi/2 - arcsin(sin phi / sin alpha)
    let u_lo = (phi.sin() / alpha.sin()).min(1.0).acos();
    let f = complete_integrand(ca);
    let seeds = boundary_layer_seeds(ca, u_lo);
    Ok(cfg.run(&f, u_lo, FRAC_PI_2, &seeds, "time_to_line")? / SQRT_2)
}

/// T2(β, φ): time from (0, β) to the line x = φ for orbits on or above the
/// separatrix (β ≥ √2). Strictly decreasing in β.
///
/// Callers wanting β < √2 must go through `alpha_of_beta` + `time_to_line`,
/// which is the continuous extension of this map.
pub fn time_above(beta: f64, phi: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(beta >= SQRT_2) {
        return Err(Error::domain(format!(
            "beta = {beta} below sqrt(2); use alpha_of_beta + time_to_line"
        )));
    }
    if !(phi > 0.0 && phi <= FRAC_PI_2) {
        return Err(Error::domain(format!("phi = {phi} outside (0, pi/2]")));
    }
    // Scale out beta: 1 - (2/beta^2) sin^2 x, written as the cancellation-free
    // sum cos^2 x + b2 sin^2 x with b2 = 1 - 2/beta^2.
    let b2 = (beta * beta - 2.0) / (beta * beta);
    let f = move |x: f64| {
        let (s, c) = x.sin_cos();
        1.0 / (c * c + b2 * s * s).sqrt()
    };
    // Only the corner beta = sqrt(2), phi -> pi/2 develops a layer (width
    // ~cos phi around pi/2 when b2 = 0).
    let seeds = if b2 < 1e-6 {
        dyadic_seeds(FRAC_PI_2, FRAC_PI_2, phi.cos().max(1e-18), 0.0, phi)
    } else {
        Vec::new()
    };
    Ok(cfg.run(&f, 0.0, phi, &seeds, "time_above")? / beta)
}

/// dT̃/dα̃ where T(α) = T̃(sin²α): differentiation under the integral sign of
/// the transformed quarter period,
/// (1/(2√2)) ∫₀^{π/2} sin²θ (1 - α̃ sin²θ)^{-3/2} dθ.
pub(crate) fn d_quarter_period_d_alpha_tilde(alpha: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= cfg.alpha_cap) {
        return Err(Error::domain(format!(
            "alpha = {alpha} outside (0, alpha_cap]"
        )));
    }
    let ca = alpha.cos();
    // flipped like the quarter period: sin^2 theta = cos^2 u
    let f = move |u: f64| {
        let (s, c) = u.sin_cos();
        let r = s * s + (ca * c) * (ca * c);
        c * c / (r * r.sqrt())
    };
    let seeds = boundary_layer_seeds(ca, 0.0);
    Ok(cfg.run(&f, 0.0, FRAC_PI_2, &seeds, "d_quarter_period")? / (2.0 * SQRT_2))
}

/// dT/dα > 0 (the quarter period is strictly increasing).
pub fn d_quarter_period(alpha: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok((2.0 * alpha).sin() * d_quarter_period_d_alpha_tilde(alpha, cfg)?)
}

/// ∫₀^φ (sin²α - sin²x)^{-3/2} dx, the building block of the branch-time
/// derivatives. Requires φ < α strictly; diverges as φ → α.
pub(crate) fn g_integral(alpha: f64, phi: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(phi > 0.0 && phi < alpha) {
        return Err(Error::domain(format!(
            "g_integral needs 0 < phi < alpha, got phi = {phi}, alpha = {alpha}"
        )));
    }
    // sin^2 a - sin^2 x = sin(a+x) sin(a-x): product form avoids cancellation
    // as x approaches alpha. Integrated in w = phi - x so the near-singular
    // end sits at w = 0; a - x = (a - phi) + w with the difference taken once.
    let apf = alpha + phi;
    let amf = alpha - phi;
    let f = move |w: f64| {
        let r = (apf - w).sin() * (amf + w).sin();
        1.0 / (r * r.sqrt())
    };
    let seeds = dyadic_seeds(0.0, phi, amf * 0.5, 0.0, phi);
    cfg.run(&f, 0.0, phi, &seeds, "g_integral")
}

/// ∂T1/∂α < 0: the chained derivative
/// -(sin 2α)/(2√2) · ∫₀^φ (sin²α - sin²x)^{-3/2} dx.
pub fn d_time_to_line_dalpha(alpha: f64, phi: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(phi < alpha) {
        return Err(Error::domain(format!(
            "d_time_to_line_dalpha needs phi < alpha, got phi = {phi}, alpha = {alpha}"
        )));
    }
    if alpha > cfg.alpha_cap {
        return Err(Error::domain("alpha above alpha_cap"));
    }
    Ok(-(2.0 * alpha).sin() / (2.0 * SQRT_2) * g_integral(alpha, phi, cfg)?)
}
