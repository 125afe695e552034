//! The four solution families of the boundary value problem and their transit
//! times.
//!
//! A solution segment from (-φ0, y(-L)) to (φ1, y(L)) is classified by the
//! signs of its endpoint ordinates and by the number k of full loops it makes
//! around the origin:
//!
//! ```text
//! kind   y(-L)  y(L)   transit time (α = orbit amplitude, k = winding)
//!  A      +      +     4k T(α) + T1(α, φ0) + T1(α, φ1)
//!  Cr     +      -     (4k+2) T(α) + T1(α, φ0) - T1(α, φ1)
//!  Cl     -      +     (4k+2) T(α) - T1(α, φ0) + T1(α, φ1)
//!  D      -      -     (4k+4) T(α) - T1(α, φ0) - T1(α, φ1)
//! ```
//!
//! The A family with k = 0 extends through the separatrix, where its time is
//! T2(β, φ0) + T2(β, φ1). Two distinguished orbits bound the families: the
//! turning-point solutions with y(L) = 0, whose times T_{*k} and T*_k organize
//! the whole diagram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stability::Stability;
use crate::timemaps::{
    d_quarter_period_d_alpha_tilde, g_integral, quarter_period, time_above, time_to_line,
    CellParams, OrbitParam, QuadConfig, Regime,
};

/// Branch family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchKind {
    A,
    Cl,
    Cr,
    D,
}

impl BranchKind {
    pub const ALL: [BranchKind; 4] = [BranchKind::A, BranchKind::Cl, BranchKind::Cr, BranchKind::D];

    pub fn as_str(&self) -> &'static str {
        match self {
            BranchKind::A => "A",
            BranchKind::Cl => "Cl",
            BranchKind::Cr => "Cr",
            BranchKind::D => "D",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(BranchKind::A),
            "Cl" | "cl" | "CL" => Ok(BranchKind::Cl),
            "Cr" | "cr" | "CR" => Ok(BranchKind::Cr),
            "D" | "d" => Ok(BranchKind::D),
            _ => Err(Error::Parse(format!("unknown branch kind '{s}'"))),
        }
    }

    /// Reflection x ↦ -x, t ↦ -t swaps the endpoint ordinates, exchanging the
    /// one-turning-point families and fixing A and D.
    pub fn mirror(&self) -> BranchKind {
        match self {
            BranchKind::A => BranchKind::A,
            BranchKind::Cr => BranchKind::Cl,
            BranchKind::Cl => BranchKind::Cr,
            BranchKind::D => BranchKind::D,
        }
    }

    /// Endpoint ordinate signs (sign of y(-L), sign of y(L)).
    pub fn ordinate_signs(&self) -> (f64, f64) {
        match self {
            BranchKind::A => (1.0, 1.0),
            BranchKind::Cr => (1.0, -1.0),
            BranchKind::Cl => (-1.0, 1.0),
            BranchKind::D => (-1.0, -1.0),
        }
    }
}

/// Branch family plus winding number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchId {
    pub kind: BranchKind,
    pub k: u32,
}

impl BranchId {
    pub fn new(kind: BranchKind, k: u32) -> Self {
        BranchId { kind, k }
    }

    pub fn mirror(&self) -> BranchId {
        BranchId {
            kind: self.kind.mirror(),
            k: self.k,
        }
    }
}

impl std::fmt::Display for BranchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[k={}]", self.kind.as_str(), self.k)
    }
}

/// One diagram sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub branch: BranchId,
    pub param: OrbitParam,
    /// Half-length L of the t interval; the transit time is 2L.
    pub half_length: f64,
    /// Field parameter λ = 8 L².
    pub lambda: f64,
    pub y_minus: f64,
    pub y_plus: f64,
    pub stability: Stability,
}

/// Times and shared ordinate magnitude of the two turning-point orbits of
/// winding k: γ_{*k} bounds the {A, Cr} pair at T_{*k}, γ*_k bounds the
/// {Cl, D} pair at T*_k, and T_{*k} < T*_k < T_{*(k+1)} whenever φ0 ≠ φ1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOrbits {
    pub k: u32,
    /// (4k+1) T(φmax) + T1(φmax, φmin)
    pub t_star: f64,
    /// (4k+3) T(φmax) - T1(φmax, φmin)
    pub t_upper: f64,
    /// |y| at the non-turning boundary, √(cos 2φmin - cos 2φmax).
    pub y_abs: f64,
}

/// λ = 8 L².
pub fn lambda_of_l(l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::domain(format!("half-length {l} must be positive")));
    }
    Ok(8.0 * l * l)
}

/// L = √(λ/8).
pub fn l_of_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("lambda {lambda} must be positive")));
    }
    Ok((lambda / 8.0).sqrt())
}

/// Parameter domain of a branch: closed-regime amplitudes, plus the open
/// regime for the through-separatrix A family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchDomain {
    /// Amplitudes (max(φ0, φ1), alpha_cap); the lower endpoint is the
    /// turning-point orbit limit and is admissible in `branch_time`.
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    /// Crossing heights [√2, ∞) for A with k = 0, glued to the closed regime
    /// continuously in energy.
    pub open_regime: bool,
}

pub fn branch_domain(cell: &CellParams, branch: BranchId, cfg: &QuadConfig) -> BranchDomain {
    BranchDomain {
        alpha_lo: cell.phi_max(),
        alpha_hi: cfg.alpha_cap,
        open_regime: branch.kind == BranchKind::A && branch.k == 0,
    }
}

fn check_closed_param(cell: &CellParams, branch: BranchId, alpha: f64, cfg: &QuadConfig) -> Result<()> {
    let lo = cell.phi_max();
    // slack of 1e-12 admits the turning-point limit after alpha-tilde
    // round-trips, which land within an ulp of phi_max
    if alpha < lo - 1e-12 {
        return Err(Error::domain(format!(
            "alpha = {alpha} below max(phi0, phi1) = {lo} for branch {branch}"
        )));
    }
    if alpha > cfg.alpha_cap {
        return Err(Error::domain(format!(
            "alpha = {alpha} above alpha_cap = {}",
            cfg.alpha_cap
        )));
    }
    Ok(())
}

/// Total transit time 2L of the orbit segment (branch, param).
///
/// The closed-regime amplitude may equal max(φ0, φ1) exactly; that is the
/// turning-point orbit limit, where the families A/Cr meet at T_{*k} and
/// Cl/D meet at T*_k.
pub fn branch_time(
    cell: &CellParams,
    branch: BranchId,
    param: &OrbitParam,
    cfg: &QuadConfig,
) -> Result<f64> {
    match param.regime() {
        Regime::Open => {
            if branch.kind != BranchKind::A || branch.k != 0 {
                return Err(Error::domain(format!(
                    "open-regime parameters only belong to the A family with k = 0, not {branch}"
                )));
            }
            let beta = param.beta().expect("open regime carries beta");
            Ok(time_above(beta, cell.phi0(), cfg)? + time_above(beta, cell.phi1(), cfg)?)
        }
        Regime::Closed => {
            let alpha = param.alpha().expect("closed regime carries alpha");
            check_closed_param(cell, branch, alpha, cfg)?;
            let t = quarter_period(alpha, cfg)?;
            let t1_0 = time_to_line(alpha, cell.phi0(), cfg)?;
            let t1_1 = time_to_line(alpha, cell.phi1(), cfg)?;
            let k = branch.k as f64;
            Ok(match branch.kind {
                BranchKind::A => 4.0 * k * t + t1_0 + t1_1,
                BranchKind::Cr => (4.0 * k + 2.0) * t + t1_0 - t1_1,
                BranchKind::Cl => (4.0 * k + 2.0) * t - t1_0 + t1_1,
                BranchKind::D => (4.0 * k + 4.0) * t - t1_0 - t1_1,
            })
        }
    }
}

/// d(branch time)/dα̃ with α̃ = sin²α, the variable in which every branch time
/// is convex. Requires α strictly above max(φ0, φ1).
pub fn branch_time_d_alpha_tilde(
    cell: &CellParams,
    branch: BranchId,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let lo = cell.phi_max();
    if !(alpha > lo) {
        return Err(Error::domain(format!(
            "derivative needs alpha > max(phi0, phi1), got {alpha} vs {lo}"
        )));
    }
    if alpha > cfg.alpha_cap {
        return Err(Error::domain("alpha above alpha_cap"));
    }
    let dt = d_quarter_period_d_alpha_tilde(alpha, cfg)?;
    // dT1/dalpha-tilde = -g(phi)/(2 sqrt 2)
    let scale = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    let g0 = g_integral(alpha, cell.phi0(), cfg)? * scale;
    let g1 = g_integral(alpha, cell.phi1(), cfg)? * scale;
    let k = branch.k as f64;
    Ok(match branch.kind {
        BranchKind::A => 4.0 * k * dt - g0 - g1,
        BranchKind::Cr => (4.0 * k + 2.0) * dt - g0 + g1,
        BranchKind::Cl => (4.0 * k + 2.0) * dt + g0 - g1,
        BranchKind::D => (4.0 * k + 4.0) * dt - g0 - g1,
    })
}

/// d(branch time)/dα = sin(2α) · d(branch time)/dα̃.
pub fn branch_time_d_alpha(
    cell: &CellParams,
    branch: BranchId,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok((2.0 * alpha).sin() * branch_time_d_alpha_tilde(cell, branch, alpha, cfg)?)
}

/// Whether the branch's transit time has an interior minimum (a fold) rather
/// than being monotone. The one-turning-point family on the wider-angle side
/// folds; its mirror image is monotone.
pub fn has_fold(cell: &CellParams, branch: BranchId) -> bool {
    match branch.kind {
        BranchKind::A => branch.k >= 1,
        BranchKind::Cl => cell.phi0() < cell.phi1(),
        BranchKind::Cr => cell.phi0() > cell.phi1(),
        BranchKind::D => false,
    }
}

/// The turning-point orbit times for winding k, evaluated at
/// φmax = max(φ0, φ1) with φmin inside; invariant under swapping the cell.
pub fn critical_times(cell: &CellParams, k: u32, cfg: &QuadConfig) -> Result<CriticalOrbits> {
    let phi_max = cell.phi_max();
    let phi_min = cell.phi_min();
    let t = quarter_period(phi_max, cfg)?;
    let t1 = time_to_line(phi_max, phi_min, cfg)?;
    let kf = k as f64;
    // cos 2 phi_min - cos 2 phi_max = 2 sin(phi_max+phi_min) sin(phi_max-phi_min)
    let y_abs = (2.0 * (phi_max + phi_min).sin() * (phi_max - phi_min).sin())
        .max(0.0)
        .sqrt();
    Ok(CriticalOrbits {
        k,
        t_star: (4.0 * kf + 1.0) * t + t1,
        t_upper: (4.0 * kf + 3.0) * t - t1,
        y_abs,
    })
}

/// Endpoint ordinates (y(-L), y(L)) from energy conservation:
/// |y| = √(E + cos 2φ_side), signs fixed by the branch kind.
pub fn endpoint_ordinates(
    cell: &CellParams,
    branch: BranchId,
    param: &OrbitParam,
) -> Result<(f64, f64)> {
    let magnitude = |phi: f64| -> Result<f64> {
        let r = match param.regime() {
            Regime::Closed => {
                let alpha = param.alpha().unwrap();
                // E + cos 2 phi = 2 sin(alpha+phi) sin(alpha-phi)
                2.0 * (alpha + phi).sin() * (alpha - phi).sin()
            }
            Regime::Open => {
                let beta = param.beta().unwrap();
                let s = phi.sin();
                beta * beta - 2.0 * s * s
            }
        };
        if r < -1e-14 {
            return Err(Error::domain(format!(
                "orbit with energy {} does not reach the line at phi = {phi}",
                param.energy()
            )));
        }
        Ok(r.max(0.0).sqrt())
    };
    let (s_minus, s_plus) = branch.kind.ordinate_signs();
    Ok((
        s_minus * magnitude(cell.phi0())?,
        s_plus * magnitude(cell.phi1())?,
    ))
}

/// Mirror image of a diagram sample: the cell swaps, the ordinates swap,
/// Cr and Cl exchange. Stability is preserved.
pub fn mirror_point(point: &BranchPoint) -> BranchPoint {
    BranchPoint {
        branch: point.branch.mirror(),
        param: point.param,
        half_length: point.half_length,
        lambda: point.lambda,
        y_minus: point.y_plus,
        y_plus: point.y_minus,
        stability: point.stability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn reference_cell() -> CellParams {
        CellParams::new(FRAC_PI_6, FRAC_PI_4).unwrap()
    }

    fn assert_rel(actual: f64, expected: f64, tol: f64, what: &str) {
        assert!(
            ((actual - expected) / expected.abs().max(1e-300)).abs() < tol,
            "{what}: got {actual}, want {expected}"
        );
    }

    // frozen from the raw-integral quadrature at 40-digit precision
    const T_STAR_0: f64 = 1.8951116188232116;
    const T_UPPER_0: f64 = 3.349003489761028;

    #[test]
    fn critical_times_reference_cell() {
        let c = critical_times(&reference_cell(), 0, &cfg()).unwrap();
        assert_rel(c.t_star, T_STAR_0, 1e-10, "T_*0");
        assert_rel(c.t_upper, T_UPPER_0, 1e-10, "T^*0");
        let two_t = 2.0 * quarter_period(FRAC_PI_4, &cfg()).unwrap();
        assert!(c.t_star < two_t && two_t < c.t_upper);
        assert_rel(c.y_abs, 0.5_f64.sqrt(), 1e-12, "y_abs");
    }

    #[test]
    fn critical_times_symmetric_degeneration() {
        let cell = CellParams::new(FRAC_PI_4, FRAC_PI_4).unwrap();
        let c = critical_times(&cell, 0, &cfg()).unwrap();
        let two_t = 2.0 * quarter_period(FRAC_PI_4, &cfg()).unwrap();
        assert!((c.t_star - two_t).abs() < 1e-10);
        assert!((c.t_upper - two_t).abs() < 1e-10);
        assert_rel(c.t_star, 2.6220575542921198, 1e-10, "2T(pi/4)");
        assert_eq!(c.y_abs, 0.0);
    }

    #[test]
    fn critical_times_ordering_in_k() {
        let cell = reference_cell();
        for k in 0..4 {
            let lo = critical_times(&cell, k, &cfg()).unwrap();
            let hi = critical_times(&cell, k + 1, &cfg()).unwrap();
            assert!(lo.t_star < lo.t_upper);
            assert!(lo.t_upper < hi.t_star);
        }
    }

    #[test]
    fn critical_times_mirror_invariant() {
        let cell = reference_cell();
        let a = critical_times(&cell, 1, &cfg()).unwrap();
        let b = critical_times(&cell.mirror(), 1, &cfg()).unwrap();
        assert_eq!(a.t_star, b.t_star);
        assert_eq!(a.t_upper, b.t_upper);
        assert_eq!(a.y_abs, b.y_abs);
    }

    #[test]
    fn branch_times_meet_critical_orbits() {
        let cell = reference_cell();
        let limit = OrbitParam::from_alpha(FRAC_PI_4).unwrap();
        for k in [0u32, 2] {
            let crit = critical_times(&cell, k, &cfg()).unwrap();
            let t_a = branch_time(&cell, BranchId::new(BranchKind::A, k), &limit, &cfg()).unwrap();
            let t_cr = branch_time(&cell, BranchId::new(BranchKind::Cr, k), &limit, &cfg()).unwrap();
            let t_cl = branch_time(&cell, BranchId::new(BranchKind::Cl, k), &limit, &cfg()).unwrap();
            let t_d = branch_time(&cell, BranchId::new(BranchKind::D, k), &limit, &cfg()).unwrap();
            assert_rel(t_a, crit.t_star, 1e-10, "A limit");
            assert_rel(t_cr, crit.t_star, 1e-10, "Cr limit");
            assert_rel(t_cl, crit.t_upper, 1e-10, "Cl limit");
            assert_rel(t_d, crit.t_upper, 1e-10, "D limit");
        }
    }

    #[test]
    fn a_branch_composition() {
        let cell = reference_cell();
        let p = OrbitParam::from_alpha(0.9).unwrap();
        let t = branch_time(&cell, BranchId::new(BranchKind::A, 0), &p, &cfg()).unwrap();
        assert_rel(t, 1.4200295523317751, 1e-10, "T_A(0.9)");
    }

    #[test]
    fn open_regime_only_for_a0() {
        let cell = reference_cell();
        let p = OrbitParam::from_beta(2.0).unwrap();
        let t = branch_time(&cell, BranchId::new(BranchKind::A, 0), &p, &cfg()).unwrap();
        assert!(t > 0.0 && t < T_STAR_0);
        assert!(branch_time(&cell, BranchId::new(BranchKind::A, 1), &p, &cfg()).is_err());
        assert!(branch_time(&cell, BranchId::new(BranchKind::D, 0), &p, &cfg()).is_err());
        let dom0 = branch_domain(&cell, BranchId::new(BranchKind::A, 0), &cfg());
        assert!(dom0.open_regime);
        assert!(!branch_domain(&cell, BranchId::new(BranchKind::A, 1), &cfg()).open_regime);
        assert!((dom0.alpha_lo - FRAC_PI_4).abs() < 1e-15);
        let other = CellParams::new(0.5, 0.7).unwrap();
        let dom = branch_domain(&other, BranchId::new(BranchKind::Cr, 0), &cfg());
        assert_eq!(dom.alpha_lo, 0.7);
        assert_eq!(dom.alpha_hi, cfg().alpha_cap);
        assert!(!dom.open_regime);
    }

    #[test]
    fn closed_param_below_domain_rejected() {
        let cell = reference_cell();
        let p = OrbitParam::from_alpha(0.5).unwrap(); // below phi_max = pi/4
        assert!(branch_time(&cell, BranchId::new(BranchKind::Cr, 0), &p, &cfg()).is_err());
    }

    #[test]
    fn endpoint_ordinates_signs_and_values() {
        let cell = reference_cell();
        // turning-point orbit: y(L) = 0, y(-L) = sqrt(cos(pi/3) - cos(pi/2))
        let limit = OrbitParam::from_alpha(FRAC_PI_4).unwrap();
        let (ym, yp) =
            endpoint_ordinates(&cell, BranchId::new(BranchKind::A, 0), &limit).unwrap();
        assert_rel(ym, 0.5_f64.sqrt(), 1e-12, "y(-L) at the critical orbit");
        assert!(yp.abs() < 1e-12);
        // D keeps both ordinates negative
        let p = OrbitParam::from_alpha(1.0).unwrap();
        let (ym, yp) = endpoint_ordinates(&cell, BranchId::new(BranchKind::D, 0), &p).unwrap();
        assert!(ym < 0.0 && yp < 0.0);
        // open-regime magnitude: beta = 2, phi0 = pi/6 gives sqrt(4 - 2 sin^2)
        let open = OrbitParam::from_beta(2.0).unwrap();
        let (ym, _) = endpoint_ordinates(&cell, BranchId::new(BranchKind::A, 0), &open).unwrap();
        assert_rel(ym, 3.5_f64.sqrt(), 1e-12, "open-regime y(-L)");
    }

    #[test]
    fn branch_derivative_signs() {
        let cell = reference_cell();
        let c = cfg();
        for &alpha in &[0.85, 1.0, 1.3] {
            let d_cr =
                branch_time_d_alpha_tilde(&cell, BranchId::new(BranchKind::Cr, 0), alpha, &c)
                    .unwrap();
            let d_d =
                branch_time_d_alpha_tilde(&cell, BranchId::new(BranchKind::D, 0), alpha, &c)
                    .unwrap();
            let d_a0 =
                branch_time_d_alpha_tilde(&cell, BranchId::new(BranchKind::A, 0), alpha, &c)
                    .unwrap();
            assert!(d_cr > 0.0, "Cr not increasing at {alpha}");
            assert!(d_d > 0.0, "D not increasing at {alpha}");
            assert!(d_a0 < 0.0, "A0 not decreasing at {alpha}");
        }
    }

    #[test]
    fn branch_derivative_matches_finite_difference() {
        let cell = reference_cell();
        let c = cfg();
        let id = BranchId::new(BranchKind::Cl, 0);
        let alpha = 1.0;
        let d = branch_time_d_alpha(&cell, id, alpha, &c).unwrap();
        let h = 1e-5;
        let tp = branch_time(&cell, id, &OrbitParam::from_alpha(alpha + h).unwrap(), &c).unwrap();
        let tm = branch_time(&cell, id, &OrbitParam::from_alpha(alpha - h).unwrap(), &c).unwrap();
        assert_rel(d, (tp - tm) / (2.0 * h), 1e-5, "Cl derivative fd");
    }

    #[test]
    fn fold_classification_depends_on_orientation() {
        let canonical = reference_cell();
        let mirrored = canonical.mirror();
        assert!(has_fold(&canonical, BranchId::new(BranchKind::Cl, 0)));
        assert!(!has_fold(&canonical, BranchId::new(BranchKind::Cr, 0)));
        assert!(has_fold(&mirrored, BranchId::new(BranchKind::Cr, 0)));
        assert!(!has_fold(&mirrored, BranchId::new(BranchKind::Cl, 0)));
        assert!(has_fold(&canonical, BranchId::new(BranchKind::A, 1)));
        assert!(!has_fold(&canonical, BranchId::new(BranchKind::A, 0)));
        assert!(!has_fold(&canonical, BranchId::new(BranchKind::D, 3)));
        let symmetric = CellParams::new(0.6, 0.6).unwrap();
        assert!(!has_fold(&symmetric, BranchId::new(BranchKind::Cl, 0)));
        assert!(!has_fold(&symmetric, BranchId::new(BranchKind::Cr, 0)));
    }

    #[test]
    fn lambda_roundtrip() {
        assert_rel(lambda_of_l(1.0).unwrap(), 8.0, 1e-15, "lambda(1)");
        for &l in &[0.3, 1.7, 9.25] {
            let back = l_of_lambda(lambda_of_l(l).unwrap()).unwrap();
            assert!((back - l).abs() < 1e-15);
        }
        assert!(lambda_of_l(0.0).is_err());
        assert!(l_of_lambda(-2.0).is_err());
    }

    #[test]
    fn mirror_transit_time_matches_swapped_kind() {
        let cell = reference_cell();
        let mirrored = cell.mirror();
        let p = OrbitParam::from_alpha(1.05).unwrap();
        let c = cfg();
        for kind in BranchKind::ALL {
            for k in [0u32, 1] {
                let id = BranchId::new(kind, k);
                let t = branch_time(&cell, id, &p, &c).unwrap();
                let tm = branch_time(&mirrored, id.mirror(), &p, &c).unwrap();
                assert!((t - tm).abs() < 1e-12, "{id} mirror time mismatch");
            }
        }
    }
}
