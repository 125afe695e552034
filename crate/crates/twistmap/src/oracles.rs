//! Independent verification machinery.
//!
//! Nothing in this module reuses the transformed kernels of [`crate::timemaps`]:
//! the quadrature oracle integrates the raw singular integrands with its own
//! Simpson rule, and the shooting / relaxation oracles work directly on the
//! differential equations. Agreement between the two routes is what the test
//! suite certifies.

use serde::{Deserialize, Serialize};

use crate::branch::BranchPoint;
use crate::error::{Error, Result};
use crate::timemaps::CellParams;

/// Energy of the planar system, V(x, y) = y² - cos 2x; conserved along orbits.
pub fn energy(x: f64, y: f64) -> f64 {
    y * y - (2.0 * x).cos()
}

fn pendulum_rhs(x: f64, y: f64) -> (f64, f64) {
    (y, -(2.0 * x).sin())
}

// ---------------------------------------------------------------------------
// Raw-integrand quadrature oracle
// ---------------------------------------------------------------------------

/// A raw time-map integral as written in the defining formulas.
#[derive(Debug, Clone, Copy)]
pub enum OracleQuery {
    /// ∫₀^α dx/√(cos 2x - cos 2α): quarter period, singular at x = α.
    QuarterPeriod { alpha: f64 },
    /// ∫₀^φ dx/√(cos 2x - cos 2α) with φ < α: bounded integrand.
    TimeToLine { alpha: f64, phi: f64 },
    /// ∫₀^φ dx/√(β² + cos 2x - 1) with β ≥ √2.
    TimeAbove { beta: f64, phi: f64 },
}

/// Classic adaptive Simpson with Richardson correction.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (b - a) < 1e-15 * (a.abs() + b.abs() + 1.0) {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::convergence("adaptive Simpson depth exhausted"));
        }
        Ok(rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }

    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, m, b, fa, fm, fb, whole, tol, 48)
}

/// Evaluate a raw time-map integral.
///
/// The singular quarter-period endpoint is handled by dyadic subdivision
/// clustering at x = α (`split_depth` halvings), with the remaining gap summed
/// by geometric extrapolation of the last two dyadic pieces — for an
/// inverse-square-root endpoint their ratio approaches 1/√2 and the
/// extrapolated tail is exact in the leading order.
pub fn quad_oracle(query: OracleQuery, split_depth: u32) -> Result<f64> {
    match query {
        OracleQuery::QuarterPeriod { alpha } => {
            if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
                return Err(Error::domain("oracle: alpha outside (0, pi/2)"));
            }
            if split_depth < 4 {
                return Err(Error::domain("oracle: split_depth must be at least 4"));
            }
            let c2a = (2.0 * alpha).cos();
            let f = move |x: f64| 1.0 / ((2.0 * x).cos() - c2a).sqrt();
            let mut total = 0.0;
            let mut prev_piece = f64::NAN;
            let mut last_piece = f64::NAN;
            let mut lo = 0.0_f64;
            let mut gap = alpha;
            for _ in 0..split_depth {
                gap *= 0.5;
                let hi = alpha - gap;
                let piece = simpson(&f, lo, hi, 1e-14)?;
                total += piece;
                prev_piece = last_piece;
                last_piece = piece;
                lo = hi;
                if last_piece.abs() < 1e-16 * total.abs() {
                    break;
                }
            }
            // geometric tail over the final gap
            if prev_piece.is_finite() && prev_piece > 0.0 && last_piece > 0.0 {
                let r = (last_piece / prev_piece).clamp(0.05, 0.95);
                total += last_piece * r / (1.0 - r);
            }
            Ok(total)
        }
        OracleQuery::TimeToLine { alpha, phi } => {
            if !(phi > 0.0 && phi < alpha && alpha < std::f64::consts::FRAC_PI_2) {
                return Err(Error::domain("oracle: need 0 < phi < alpha < pi/2"));
            }
            let c2a = (2.0 * alpha).cos();
            let f = move |x: f64| 1.0 / ((2.0 * x).cos() - c2a).sqrt();
            simpson(&f, 0.0, phi, 1e-14)
        }
        OracleQuery::TimeAbove { beta, phi } => {
            if !(beta >= std::f64::consts::SQRT_2) {
                return Err(Error::domain("oracle: beta below sqrt(2)"));
            }
            if !(phi > 0.0 && phi <= std::f64::consts::FRAC_PI_2) {
                return Err(Error::domain("oracle: phi outside (0, pi/2]"));
            }
            let b2 = beta * beta;
            let f = move |x: f64| 1.0 / (b2 + (2.0 * x).cos() - 1.0).sqrt();
            simpson(&f, 0.0, phi, 1e-14)
        }
    }
}

// ---------------------------------------------------------------------------
// Orbit integration (Dormand–Prince 5(4))
// ---------------------------------------------------------------------------

/// A time-ordered orbit sample with its worst energy drift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitTrace {
    /// (t, x, y) triples, t strictly increasing.
    pub samples: Vec<(f64, f64, f64)>,
    /// max |V(x, y) - V(x₀, y₀)| over the trace.
    pub energy_drift: f64,
}

impl OrbitTrace {
    pub fn last(&self) -> (f64, f64, f64) {
        *self.samples.last().expect("trace is never empty")
    }

    /// Sign changes of y between consecutive samples (turning-point count).
    pub fn y_sign_changes(&self) -> usize {
        let mut count = 0;
        let mut last_sign = 0i8;
        for &(_, _, y) in &self.samples {
            let s = if y > 0.0 {
                1
            } else if y < 0.0 {
                -1
            } else {
                0
            };
            if s != 0 {
                if last_sign != 0 && s != last_sign {
                    count += 1;
                }
                last_sign = s;
            }
        }
        count
    }
}

const DP_C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Adaptive integration of the pendulum system from `t0`, recording a sample
/// at every accepted step plus each time in `checkpoints` (which must be
/// increasing and end at `t0 + duration`).
fn integrate_sampled(
    t0: f64,
    start: (f64, f64),
    checkpoints: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<OrbitTrace> {
    let (mut x, mut y) = start;
    let mut t = t0;
    let e0 = energy(x, y);
    let mut drift = 0.0_f64;
    let mut samples = vec![(t, x, y)];
    let t_end = *checkpoints.last().expect("at least one checkpoint");

    let mut h = (1e-3 * (t_end - t0)).clamp(1e-12, 0.1);
    let mut next_cp = 0usize;
    let mut steps = 0u64;
    const MAX_STEPS: u64 = 50_000_000;

    while t < t_end {
        while next_cp < checkpoints.len() && checkpoints[next_cp] <= t {
            next_cp += 1;
        }
        let mut clamp_t = t_end;
        if next_cp < checkpoints.len() {
            clamp_t = checkpoints[next_cp];
        }
        if t + h > clamp_t {
            h = clamp_t - t;
        }
        if h < 1e-14 * (1.0 + t.abs()) {
            // checkpoint reached at machine precision
            t = clamp_t;
            samples.push((t, x, y));
            drift = drift.max((energy(x, y) - e0).abs());
            h = (1e-3 * (t_end - t0)).clamp(1e-12, 0.1);
            continue;
        }

        let mut k = [(0.0_f64, 0.0_f64); 7];
        k[0] = pendulum_rhs(x, y);
        for stage in 0..6 {
            let mut xs = x;
            let mut ys = y;
            for j in 0..=stage {
                xs += h * DP_A[stage][j] * k[j].0;
                ys += h * DP_A[stage][j] * k[j].1;
            }
            let _ = DP_C[stage];
            k[stage + 1] = pendulum_rhs(xs, ys);
        }
        // 5th-order solution is the last stage state (FSAL form)
        let mut xn = x;
        let mut yn = y;
        for j in 0..6 {
            xn += h * DP_A[5][j] * k[j].0;
            yn += h * DP_A[5][j] * k[j].1;
        }
        let mut ex = 0.0;
        let mut ey = 0.0;
        for j in 0..7 {
            ex += DP_E[j] * k[j].0;
            ey += DP_E[j] * k[j].1;
        }
        ex *= h;
        ey *= h;
        let sx = atol + rtol * x.abs().max(xn.abs());
        let sy = atol + rtol * y.abs().max(yn.abs());
        let err = (0.5 * ((ex / sx).powi(2) + (ey / sy).powi(2))).sqrt();

        if err <= 1.0 {
            t += h;
            x = xn;
            y = yn;
            samples.push((t, x, y));
            drift = drift.max((energy(x, y) - e0).abs());
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-15 {
            return Err(Error::convergence(format!(
                "step size underflow at t = {t}"
            )));
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::convergence("step budget exhausted"));
        }
    }

    Ok(OrbitTrace {
        samples,
        energy_drift: drift,
    })
}

/// Trace the orbit through `start` for the given duration (t runs from 0).
pub fn integrate_orbit(start: (f64, f64), duration: f64, tol: f64) -> Result<OrbitTrace> {
    if !(duration > 0.0) {
        return Err(Error::domain("duration must be positive"));
    }
    integrate_sampled(0.0, start, &[duration], tol, tol * 1e-2)
}

/// Integrate the boundary value candidate from (-φ0, y(-L)) over [-L, L] and
/// return |x(L) - φ1| + |y(L) - y(L)_expected|.
pub fn shoot_check(cell: &CellParams, point: &BranchPoint) -> Result<f64> {
    let l = point.half_length;
    if !(l > 0.0) {
        return Err(Error::domain("point has nonpositive half-length"));
    }
    // tight tolerances: near-saddle passages amplify committed error by
    // roughly exp(sqrt(2) * time spent near the saddle)
    let trace = integrate_sampled(-l, (-cell.phi0(), point.y_minus), &[l], 1e-13, 1e-14)?;
    let (_, x_end, y_end) = trace.last();
    Ok((x_end - cell.phi1()).abs() + (y_end - point.y_plus).abs())
}

/// Equilibrium profile φ(ζ) on n+2 uniformly spaced nodes of [0, 1],
/// boundaries included, obtained by sampling the shot orbit at
/// t(ζ) = 2L (ζ - 1/2). The endpoint values are pinned to the boundary data.
pub fn equilibrium_profile(cell: &CellParams, point: &BranchPoint, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("need at least one interior node"));
    }
    let l = point.half_length;
    let two_l = 2.0 * l;
    let checkpoints: Vec<f64> = (1..=n + 1)
        .map(|i| -l + two_l * i as f64 / (n + 1) as f64)
        .collect();
    let trace = integrate_sampled(-l, (-cell.phi0(), point.y_minus), &checkpoints, 1e-11, 1e-13)?;

    let mut profile = Vec::with_capacity(n + 2);
    profile.push(-cell.phi0());
    let mut idx = 0usize;
    for &cp in checkpoints.iter().take(n) {
        while idx < trace.samples.len() && trace.samples[idx].0 < cp - 1e-12 {
            idx += 1;
        }
        let (_, x, _) = trace.samples[idx.min(trace.samples.len() - 1)];
        profile.push(x);
    }
    profile.push(cell.phi1());
    Ok(profile)
}

// ---------------------------------------------------------------------------
// Relaxation of the gradient flow φ_s = φ_ζζ + λ sin φ cos φ
// ---------------------------------------------------------------------------

/// What the perturbed profile did under the parabolic flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelaxOutcome {
    ReturnedToStart,
    EscapedToOther,
    Inconclusive,
}

/// One relaxation experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxationRun {
    pub half_length: f64,
    pub lambda: f64,
    /// Interior node count of the ζ grid.
    pub grid_size: usize,
    pub profile_initial: Vec<f64>,
    pub profile_final: Vec<f64>,
    /// Diffusion time actually simulated (escapes stop early).
    pub t_final: f64,
    pub outcome: RelaxOutcome,
}

/// Relax the equilibrium of `point` perturbed by `perturbation · sin(πζ)`.
///
/// Second-order central differences in ζ with the Dirichlet values pinned,
/// explicit stepping with dt = 0.4 Δζ². The run is declared
/// `ReturnedToStart` when the final sup-distance to the unperturbed profile is
/// below |perturbation|/10, `EscapedToOther` beyond 5·|perturbation|, and
/// `Inconclusive` in between.
pub fn relax(
    cell: &CellParams,
    point: &BranchPoint,
    perturbation: f64,
    t_final: f64,
    grid_size: usize,
) -> Result<RelaxationRun> {
    if grid_size < 51 {
        return Err(Error::domain("grid_size must be at least 51"));
    }
    if !(perturbation.abs() <= 0.05) {
        return Err(Error::domain("|perturbation| must not exceed 0.05"));
    }
    if !(t_final > 0.0) {
        return Err(Error::domain("t_final must be positive"));
    }

    let n = grid_size;
    let equilibrium = equilibrium_profile(cell, point, n)?;
    let dz = 1.0 / (n + 1) as f64;
    let lambda = 8.0 * point.half_length * point.half_length;

    let mut u = equilibrium.clone();
    for (i, v) in u.iter_mut().enumerate().take(n + 1).skip(1) {
        let zeta = i as f64 * dz;
        *v += perturbation * (std::f64::consts::PI * zeta).sin();
    }
    let profile_initial = u.clone();

    let dt = 0.4 * dz * dz;
    let n_steps = (t_final / dt).ceil() as u64;
    if n_steps > 2_000_000_000 {
        return Err(Error::convergence("relaxation step count overflow"));
    }
    let escape = 5.0 * perturbation.abs();
    let inv_dz2 = 1.0 / (dz * dz);

    let sup_dist = |u: &[f64], v: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };

    let mut scratch = vec![0.0_f64; n + 2];
    let mut t_reached = 0.0;
    let mut escaped_early = false;
    for step in 0..n_steps {
        let h = dt.min(t_final - t_reached);
        scratch.copy_from_slice(&u);
        for i in 1..=n {
            let lap = (scratch[i + 1] - 2.0 * scratch[i] + scratch[i - 1]) * inv_dz2;
            u[i] = scratch[i] + h * (lap + 0.5 * lambda * (2.0 * scratch[i]).sin());
        }
        t_reached += h;
        if step % 2048 == 0 && sup_dist(&u, &equilibrium) > escape {
            escaped_early = true;
            break;
        }
    }

    let d = sup_dist(&u, &equilibrium);
    let outcome = if escaped_early || d > escape {
        RelaxOutcome::EscapedToOther
    } else if d < perturbation.abs() / 10.0 {
        RelaxOutcome::ReturnedToStart
    } else {
        RelaxOutcome::Inconclusive
    };

    Ok(RelaxationRun {
        half_length: point.half_length,
        lambda,
        grid_size: n,
        profile_initial,
        profile_final: u,
        t_final: t_reached,
        outcome,
    })
}
