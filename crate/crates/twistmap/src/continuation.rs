//! Branch tracing, transit-time inversion, fold location and diagram
//! assembly.
//!
//! Because the system is integrable, continuation reduces to inverting the
//! explicit transit-time formulas: monotone families by bracketed root
//! finding, folded families by locating the unique transit-time minimum first
//! and solving on each side of it.

use serde::{Deserialize, Serialize};

use crate::branch::{
    branch_time, critical_times, endpoint_ordinates, has_fold, lambda_of_l, BranchId, BranchKind,
    BranchPoint, CriticalOrbits,
};
use crate::error::{Error, Result};
use crate::stability::classify;
use crate::timemaps::{CellParams, OrbitParam, QuadConfig};

/// Relative residual allowed when matching a transit time: roots satisfy
/// |branch_time - 2L| <= ROOT_TOL * (1 + 2L).
const ROOT_TOL: f64 = 1e-10;

/// Largest α̃ = sin²α the f64 parametrization can resolve: sin²α saturates to
/// 1.0 within ~1.5e-8 of π/2, and this ceiling (α ≈ π/2 − 3.2e-8, transit
/// times beyond 26) is unreachable by any diagram sweep anyway.
const ALPHA_TILDE_MAX: f64 = 1.0 - 1e-15;

fn alpha_tilde_ceiling(cfg: &QuadConfig) -> f64 {
    let s = cfg.alpha_cap.sin();
    (s * s).min(ALPHA_TILDE_MAX)
}

/// A fold of a branch: the unique interior minimum of its transit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleNode {
    pub branch: BranchId,
    pub param_at_min: OrbitParam,
    pub l_sn: f64,
    /// Minimal transit time, = 2 l_sn.
    pub t_min: f64,
}

/// Points of one (kind, k) family, ordered by increasing energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchGroup {
    pub id: BranchId,
    pub points: Vec<BranchPoint>,
}

/// A complete bifurcation picture for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub cell: CellParams,
    pub branches: Vec<BranchGroup>,
    pub criticals: Vec<CriticalOrbits>,
    pub saddles: Vec<SaddleNode>,
    pub symmetric_overlay: Option<Box<Diagram>>,
}

// ---------------------------------------------------------------------------
// Scalar solvers
// ---------------------------------------------------------------------------

/// Brent root finding on a bracketing interval, stopping on either the
/// function tolerance or interval exhaustion.
fn brent_root<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::convergence("root is not bracketed"));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 1e-16;
        let xm = 0.5 * (c - b);
        if fb.abs() <= ftol || xm.abs() <= tol1 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else if xm > 0.0 {
            tol1
        } else {
            -tol1
        };
        fb = f(b)?;
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::convergence("Brent iteration budget exhausted"))
}

/// Golden-section minimization on [a, b] down to interval width `xtol`.
fn golden_min<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

// ---------------------------------------------------------------------------
// Parameter grids
// ---------------------------------------------------------------------------

/// Geometric ladder of fractions in (lo_frac, hi_frac], ascending.
fn geometric_fractions(n: usize, lo_frac: f64, hi_frac: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![hi_frac];
    }
    let ratio = (hi_frac / lo_frac).powf(1.0 / (n - 1) as f64);
    (0..n).map(|j| lo_frac * ratio.powi(j as i32)).collect()
}

/// Closed-regime α̃ grid on [at_lo, at_hi]: the turning-point limit first,
/// then a geometric cluster resolving the steep fold region, a uniform bulk,
/// and a geometric approach to the divergence at the cap.
fn alpha_tilde_grid(at_lo: f64, at_hi: f64, n: usize) -> Vec<f64> {
    let range = at_hi - at_lo;
    let mut grid = Vec::with_capacity(n);
    if n < 12 {
        for i in 0..n {
            grid.push(at_lo + range * i as f64 / (n - 1).max(1) as f64);
        }
        return grid;
    }
    let n_front = (n / 4).min(24);
    let n_back = (n / 4).min(24);
    let n_bulk = n - 2 - n_front - n_back;

    grid.push(at_lo);
    for s in geometric_fractions(n_front, 1e-9, 0.05) {
        grid.push(at_lo + range * s);
    }
    for i in 0..n_bulk {
        let s = 0.05 + 0.9 * (i + 1) as f64 / (n_bulk + 1) as f64;
        grid.push(at_lo + range * s);
    }
    let mut back: Vec<f64> = geometric_fractions(n_back, 1e-9, 0.05)
        .into_iter()
        .map(|s| at_hi - range * s)
        .collect();
    back.reverse();
    grid.extend(back);
    grid.push(at_hi);
    grid.dedup();
    grid
}

/// Energy grid for the through-separatrix A family: geometric cluster at the
/// turning-point limit, uniform bulk across the separatrix, then a geometric
/// far tail into the open regime where the transit time decays to zero.
fn energy_grid_a0(e_lo: f64, n: usize) -> Vec<f64> {
    let e_knee = 7.0; // beta = 2 sqrt 2
    let closed_range = 1.0 - e_lo;
    let mut grid = Vec::with_capacity(n);
    if n < 12 {
        for i in 0..n {
            grid.push(e_lo + (e_knee - e_lo) * i as f64 / (n - 1).max(1) as f64);
        }
        return grid;
    }
    let n_front = (n / 4).min(24);
    let n_tail = (n / 8).min(8);
    let n_bulk = n - 1 - n_front - n_tail;

    grid.push(e_lo);
    for s in geometric_fractions(n_front, 1e-9, 0.05) {
        grid.push(e_lo + closed_range * s);
    }
    let bulk_start = e_lo + 0.05 * closed_range;
    for i in 0..n_bulk {
        grid.push(bulk_start + (e_knee - bulk_start) * (i + 1) as f64 / n_bulk as f64);
    }
    let mut e = e_knee;
    for _ in 0..n_tail {
        e = 4.0 * e + 3.0; // doubles beta
        grid.push(e);
    }
    grid.dedup();
    grid
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Assemble the full diagram sample at one orbit parameter: transit time,
/// field parameter, endpoint ordinates and stability verdict.
pub fn point_at(
    cell: &CellParams,
    branch: BranchId,
    param: OrbitParam,
    cfg: &QuadConfig,
) -> Result<BranchPoint> {
    let t = branch_time(cell, branch, &param, cfg)?;
    let l = 0.5 * t;
    let (y_minus, y_plus) = endpoint_ordinates(cell, branch, &param)?;
    let verdict = classify(cell, branch, &param, cfg)?;
    Ok(BranchPoint {
        branch,
        param,
        half_length: l,
        lambda: lambda_of_l(l)?,
        y_minus,
        y_plus,
        stability: verdict.verdict,
    })
}

fn param_at_alpha_tilde(at: f64) -> Result<OrbitParam> {
    OrbitParam::from_energy(2.0 * at - 1.0)
}

/// Sample one branch on its natural grid, keeping points with L <= l_max.
///
/// The grid is uniform in energy for the through-separatrix family and in
/// α̃ = sin²α otherwise, with geometric clustering toward both domain
/// endpoints; the first grid point is the turning-point orbit limit. The
/// result is empty when the whole branch lies beyond l_max.
pub fn trace_branch(
    cell: &CellParams,
    branch: BranchId,
    n_points: usize,
    l_max: f64,
    cfg: &QuadConfig,
) -> Result<Vec<BranchPoint>> {
    if n_points < 2 {
        return Err(Error::domain("n_points must be at least 2"));
    }
    if !(l_max > 0.0) {
        return Err(Error::domain("l_max must be positive"));
    }
    let phi_max = cell.phi_max();
    let at_lo = {
        let s = phi_max.sin();
        s * s
    };
    let at_hi = alpha_tilde_ceiling(cfg);

    let params: Vec<OrbitParam> = if branch.kind == BranchKind::A && branch.k == 0 {
        energy_grid_a0(2.0 * at_lo - 1.0, n_points)
            .into_iter()
            .map(OrbitParam::from_energy)
            .collect::<Result<_>>()?
    } else {
        alpha_tilde_grid(at_lo, at_hi, n_points)
            .into_iter()
            .map(param_at_alpha_tilde)
            .collect::<Result<_>>()?
    };

    let mut points = Vec::with_capacity(params.len());
    for param in params {
        let point = point_at(cell, branch, param, cfg)?;
        if point.half_length <= l_max {
            points.push(point);
        }
    }
    log::debug!(
        "traced {branch} for cell ({}, {}): {} of {} points kept below L = {l_max}",
        cell.phi0(),
        cell.phi1(),
        points.len(),
        n_points
    );
    Ok(points)
}

/// Locate the unique transit-time minimum of a folded branch
/// (the one-turning-point family on the wider side, or A with k >= 1).
///
/// Golden-section search on α̃ after a decade-probe bracket, to 1e-10 in α̃.
pub fn find_saddle_node(cell: &CellParams, branch: BranchId, cfg: &QuadConfig) -> Result<SaddleNode> {
    if !has_fold(cell, branch) {
        return Err(Error::domain(format!(
            "branch {branch} is monotone for this cell; no saddle-node exists"
        )));
    }
    let phi_max = cell.phi_max();
    let at_lo = phi_max.sin().powi(2);
    let at_hi = alpha_tilde_ceiling(cfg);
    let range = at_hi - at_lo;

    let mut time_at = |at: f64| -> Result<f64> {
        branch_time(cell, branch, &param_at_alpha_tilde(at)?, cfg)
    };

    // decade probes from the turning-point end; the convex time dips below
    // its critical value immediately, so the argmin brackets the fold
    let mut probes = vec![at_lo];
    for j in 0..40 {
        let at = at_lo + range * 10f64.powi(-j);
        if at > at_lo && at < at_hi {
            probes.push(at);
        }
    }
    probes.push(at_hi);
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    probes.dedup();

    let values: Vec<f64> = probes
        .iter()
        .map(|&at| time_at(at))
        .collect::<Result<_>>()?;
    let (imin, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let lo = probes[imin.saturating_sub(1)];
    let hi = probes[(imin + 1).min(probes.len() - 1)];

    let at_sn = golden_min(&mut time_at, lo, hi, 1e-10)?;
    let param = param_at_alpha_tilde(at_sn)?;
    let t_min = branch_time(cell, branch, &param, cfg)?;
    Ok(SaddleNode {
        branch,
        param_at_min: param,
        l_sn: 0.5 * t_min,
        t_min,
    })
}

/// All orbit parameters on `branch` whose transit time equals 2L.
///
/// Monotone families yield zero or one root by bisection; folded families are
/// split at the saddle-node and solved on each side, yielding up to two roots
/// ordered by increasing α̃ (lower fold root first).
pub fn solve_at_l(
    cell: &CellParams,
    branch: BranchId,
    l: f64,
    cfg: &QuadConfig,
) -> Result<Vec<OrbitParam>> {
    if !(l > 0.0) {
        return Err(Error::domain("l must be positive"));
    }
    let target = 2.0 * l;
    let ftol = ROOT_TOL * (1.0 + target);
    let phi_max = cell.phi_max();
    let at_lo = phi_max.sin().powi(2);
    let at_hi = alpha_tilde_ceiling(cfg);

    let time_at = |at: f64| -> Result<f64> {
        branch_time(cell, branch, &param_at_alpha_tilde(at)?, cfg)
    };

    // through-separatrix family: strictly decreasing in energy
    if branch.kind == BranchKind::A && branch.k == 0 {
        let e_lo = 2.0 * at_lo - 1.0;
        let time_e = |e: f64| -> Result<f64> {
            branch_time(cell, branch, &OrbitParam::from_energy(e)?, cfg)
        };
        let t_crit = time_e(e_lo)?;
        if target > t_crit + ftol {
            return Ok(vec![]);
        }
        if (target - t_crit).abs() <= ftol {
            return Ok(vec![OrbitParam::from_energy(e_lo)?]);
        }
        let mut e_hi = e_lo.max(0.0) + 1.0;
        let mut f_hi = time_e(e_hi)? - target;
        let mut grow = 0;
        while f_hi > 0.0 {
            e_hi = 4.0 * e_hi + 3.0;
            f_hi = time_e(e_hi)? - target;
            grow += 1;
            if grow > 60 {
                return Err(Error::convergence("could not bracket the open-regime root"));
            }
        }
        let root = brent_root(
            |e| Ok(time_e(e)? - target),
            e_lo,
            e_hi,
            t_crit - target,
            f_hi,
            ftol,
        )?;
        return Ok(vec![OrbitParam::from_energy(root)?]);
    }

    let solve_on = |lo: f64,
                    hi: f64,
                    f_lo: f64,
                    f_hi: f64|
     -> Result<Option<OrbitParam>> {
        if f_lo.abs() <= ftol {
            return Ok(Some(param_at_alpha_tilde(lo)?));
        }
        if f_hi.abs() <= ftol {
            return Ok(Some(param_at_alpha_tilde(hi)?));
        }
        if f_lo.signum() == f_hi.signum() {
            return Ok(None);
        }
        let root = brent_root(|at| Ok(time_at(at)? - target), lo, hi, f_lo, f_hi, ftol)?;
        Ok(Some(param_at_alpha_tilde(root)?))
    };

    if has_fold(cell, branch) {
        let sn = find_saddle_node(cell, branch, cfg)?;
        if target < sn.t_min - ftol {
            return Ok(vec![]);
        }
        if (target - sn.t_min).abs() <= ftol {
            return Ok(vec![sn.param_at_min]);
        }
        let at_sn = sn.param_at_min.alpha_tilde().unwrap();
        let mut roots = Vec::new();
        // the left side ends at the turning-point orbit, which belongs to the
        // adjacent family pair rather than to this branch's interior: only
        // targets strictly below it produce a left root
        let t_crit = time_at(at_lo)?;
        if target < t_crit - ftol {
            if let Some(p) = solve_on(at_lo, at_sn, t_crit - target, sn.t_min - target)? {
                roots.push(p);
            }
        }
        let t_cap = time_at(at_hi)?;
        if let Some(p) = solve_on(at_sn, at_hi, sn.t_min - target, t_cap - target)? {
            roots.push(p);
        }
        return Ok(roots);
    }

    // monotone increasing closed families
    let t_crit = time_at(at_lo)?;
    if target < t_crit - ftol {
        return Ok(vec![]);
    }
    if (target - t_crit).abs() <= ftol {
        return Ok(vec![param_at_alpha_tilde(at_lo)?]);
    }
    let t_cap = time_at(at_hi)?;
    if target > t_cap {
        return Ok(vec![]);
    }
    Ok(solve_on(at_lo, at_hi, t_crit - target, t_cap - target)?
        .map(|p| vec![p])
        .unwrap_or_default())
}

/// Assemble the full diagram: every family for k = 0..k_max, the
/// turning-point markers, the saddle-nodes, and optionally the midpoint
/// symmetric overlay. Deterministic for fixed inputs.
pub fn build_diagram(
    cell: &CellParams,
    k_max: u32,
    l_max: f64,
    n_points: usize,
    overlay_symmetric: bool,
    cfg: &QuadConfig,
) -> Result<Diagram> {
    let mut branches = Vec::new();
    for kind in BranchKind::ALL {
        for k in 0..=k_max {
            let id = BranchId::new(kind, k);
            let points = trace_branch(cell, id, n_points, l_max, cfg)?;
            if !points.is_empty() {
                branches.push(BranchGroup { id, points });
            }
        }
    }

    let mut criticals = Vec::new();
    for k in 0..=k_max {
        criticals.push(critical_times(cell, k, cfg)?);
    }

    let mut saddles = Vec::new();
    for kind in BranchKind::ALL {
        for k in 0..=k_max {
            let id = BranchId::new(kind, k);
            if has_fold(cell, id) {
                saddles.push(find_saddle_node(cell, id, cfg)?);
            }
        }
    }

    let symmetric_overlay = if overlay_symmetric {
        let mid = 0.5 * (cell.phi0() + cell.phi1());
        let sym = CellParams::new(mid, mid)?;
        Some(Box::new(build_diagram(&sym, k_max, l_max, n_points, false, cfg)?))
    } else {
        None
    };

    Ok(Diagram {
        cell: *cell,
        branches,
        criticals,
        saddles,
        symmetric_overlay,
    })
}

/// The mirror image of a diagram: the cell swaps its angles, Cr and Cl
/// exchange roles, and every point swaps its endpoint ordinates. Applying it
/// twice is the identity.
pub fn mirror_diagram(diagram: &Diagram) -> Diagram {
    let mut branches: Vec<BranchGroup> = diagram
        .branches
        .iter()
        .map(|g| BranchGroup {
            id: g.id.mirror(),
            points: g.points.iter().map(crate::branch::mirror_point).collect(),
        })
        .collect();
    branches.sort_by_key(|g| g.id);
    let mut saddles: Vec<SaddleNode> = diagram
        .saddles
        .iter()
        .map(|s| SaddleNode {
            branch: s.branch.mirror(),
            ..*s
        })
        .collect();
    saddles.sort_by_key(|s| s.branch);
    Diagram {
        cell: diagram.cell.mirror(),
        branches,
        criticals: diagram.criticals.clone(),
        saddles,
        symmetric_overlay: diagram
            .symmetric_overlay
            .as_ref()
            .map(|d| Box::new(mirror_diagram(d))),
    }
}
