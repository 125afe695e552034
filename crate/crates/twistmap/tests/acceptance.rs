//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS line with the measured quantities once its assertions hold.
//!
//! Reference cell: phi0 = pi/6, phi1 = pi/4 unless stated otherwise.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, SQRT_2};

use rand::prelude::*;
use twistmap::{
    alpha_of_beta, branch_time, branch_time_d_alpha, build_diagram, classify, critical_times,
    find_saddle_node, lambda_of_l, mirror_diagram, point_at, quad_oracle, quarter_period, relax,
    shoot_check, solve_at_l, time_above, time_to_line, zero_count, BranchId, BranchKind,
    CellParams, OracleQuery, OrbitParam, QuadConfig, RelaxOutcome, Stability,
};

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn cell() -> CellParams {
    CellParams::new(FRAC_PI_6, FRAC_PI_4).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Largest alpha-tilde the f64 parametrization resolves; matches the
/// continuation module's ceiling.
const AT_MAX: f64 = 1.0 - 1e-15;

#[test]
fn c01_time_map_limits() {
    let t0 = quarter_period(1e-6, &cfg()).unwrap();
    assert!(
        (t0 - 1.110721).abs() < 1e-5,
        "T(1e-6) = {t0}, want 1.110721 +- 1e-5"
    );
    let t1 = quarter_period(FRAC_PI_2 - 1e-6, &cfg()).unwrap();
    assert!(t1 > 5.0, "T(pi/2 - 1e-6) = {t1}, want > 5");
    println!("ACCEPTANCE 01 PASS: time-map limits (T(1e-6) = {t0:.7}, T(pi/2-1e-6) = {t1:.4})");
}

#[test]
fn c02_monotonicity_grids() {
    let c = cfg();
    let n = 500;
    let mut prev = f64::NEG_INFINITY;
    let mut violations = 0;
    for i in 0..n {
        let a = 1e-3 + (c.alpha_cap - 1e-3) * i as f64 / (n - 1) as f64;
        let t = quarter_period(a, &c).unwrap();
        if t <= prev {
            violations += 1;
        }
        prev = t;
    }
    for phi in [0.3_f64, 0.6] {
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let a = phi + 1e-6 + (c.alpha_cap - phi - 1e-6) * i as f64 / (n - 1) as f64;
            let t = time_to_line(a, phi, &c).unwrap();
            if t >= prev {
                violations += 1;
            }
            prev = t;
        }
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let b = SQRT_2 + 8.0 * i as f64 / (n - 1) as f64;
            let t = time_above(b, phi, &c).unwrap();
            if t >= prev {
                violations += 1;
            }
            prev = t;
        }
    }
    assert_eq!(violations, 0, "monotonicity violations on 500-point grids");
    println!("ACCEPTANCE 02 PASS: T increasing, T1/T2 decreasing on 500-point grids (0 violations)");
}

#[test]
fn c03_oracle_equivalence() {
    let c = cfg();
    let mut rng = StdRng::seed_from_u64(0x7157_3a9b);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let alpha = rng.gen_range(0.05..1.45);
        let kernel = quarter_period(alpha, &c).unwrap();
        let oracle = quad_oracle(OracleQuery::QuarterPeriod { alpha }, 28).unwrap();
        worst = worst.max(rel(kernel, oracle));
    }
    for _ in 0..50 {
        let alpha: f64 = rng.gen_range(0.15..1.45);
        let phi = rng.gen_range(0.05..alpha - 0.05);
        let kernel = time_to_line(alpha, phi, &c).unwrap();
        let oracle = quad_oracle(OracleQuery::TimeToLine { alpha, phi }, 28).unwrap();
        worst = worst.max(rel(kernel, oracle));
    }
    for _ in 0..50 {
        let beta = rng.gen_range(SQRT_2..5.0);
        let phi = rng.gen_range(0.05..FRAC_PI_2 - 0.01);
        let kernel = time_above(beta, phi, &c).unwrap();
        let oracle = quad_oracle(OracleQuery::TimeAbove { beta, phi }, 28).unwrap();
        worst = worst.max(rel(kernel, oracle));
    }
    assert!(worst < 1e-8, "worst kernel/oracle disagreement {worst:e}");
    println!("ACCEPTANCE 03 PASS: kernels vs raw-integrand oracle on 150 random samples (worst rel {worst:.2e})");
}

#[test]
fn c04_critical_time_inequality() {
    let c = cfg();
    let crit = critical_times(&cell(), 0, &c).unwrap();
    let two_t = 2.0 * quarter_period(FRAC_PI_4, &c).unwrap();
    assert!(
        crit.t_star < two_t && two_t < crit.t_upper,
        "expected {} < {} < {}",
        crit.t_star,
        two_t,
        crit.t_upper
    );
    let sym = CellParams::new(FRAC_PI_4, FRAC_PI_4).unwrap();
    let crit_sym = critical_times(&sym, 0, &c).unwrap();
    assert!((crit_sym.t_star - two_t).abs() < 1e-10);
    assert!((crit_sym.t_upper - two_t).abs() < 1e-10);
    println!(
        "ACCEPTANCE 04 PASS: T_* = {:.6} < 2T(phi1) = {:.6} < T^* = {:.6}; symmetric case equal within 1e-10",
        crit.t_star, two_t, crit.t_upper
    );
}

#[test]
fn c05_branch_ordering() {
    let c = cfg();
    let cell = cell();
    for k in 0..=3u32 {
        let lo = critical_times(&cell, k, &c).unwrap();
        let hi = critical_times(&cell, k + 1, &c).unwrap();
        assert!(lo.t_star < lo.t_upper, "T_*{k} < T^*{k} violated");
        assert!(lo.t_upper < hi.t_star, "T^*{k} < T_*{} violated", k + 1);
    }
    let at_lo = FRAC_PI_4.sin().powi(2);
    let mut checked = 0;
    for k in 0..=3u32 {
        let crit = critical_times(&cell, k, &c).unwrap();
        for i in 0..200 {
            let at = at_lo + 1e-6 + (0.97 - at_lo - 1e-6) * i as f64 / 199.0;
            let p = OrbitParam::from_energy(2.0 * at - 1.0).unwrap();
            let t_cr = branch_time(&cell, BranchId::new(BranchKind::Cr, k), &p, &c).unwrap();
            let t_d = branch_time(&cell, BranchId::new(BranchKind::D, k), &p, &c).unwrap();
            assert!(t_cr > crit.t_star, "T_Cr <= T_*{k} at alpha~ = {at}");
            assert!(t_d > crit.t_upper, "T_D <= T^*{k} at alpha~ = {at}");
            checked += 2;
        }
    }
    assert_eq!(checked, 1600);
    println!("ACCEPTANCE 05 PASS: T_*k < T^*k < T_*(k+1) for k=0..3; Cr/D supercritical on 200-sample grids");
}

#[test]
fn c06_cr_monotone_d_supercritical() {
    let c = cfg();
    let cell = cell();
    let at_lo = FRAC_PI_4.sin().powi(2);
    let crit = critical_times(&cell, 0, &c).unwrap();
    let mut min_slope = f64::INFINITY;
    let mut min_excess = f64::INFINITY;
    for i in 0..200 {
        let at = at_lo + 1e-5 + (0.97 - at_lo - 1e-5) * i as f64 / 199.0;
        let alpha = at.sqrt().asin();
        let d = branch_time_d_alpha(&cell, BranchId::new(BranchKind::Cr, 0), alpha, &c).unwrap();
        assert!(d > 0.0, "dT_Cr/dalpha <= 0 at alpha = {alpha}");
        min_slope = min_slope.min(d);
        let p = OrbitParam::from_alpha(alpha).unwrap();
        let t_d = branch_time(&cell, BranchId::new(BranchKind::D, 0), &p, &c).unwrap();
        assert!(t_d > crit.t_upper, "T_D <= T^* at alpha = {alpha}");
        min_excess = min_excess.min(t_d - crit.t_upper);
    }
    println!(
        "ACCEPTANCE 06 PASS: dT_Cr/dalpha > 0 (min {min_slope:.3e}) and T_D - T^* > 0 (min {min_excess:.3e}) at 200 grid points"
    );
}

fn convexity_checks(id: BranchId, t_limit_name: &str, t_limit: f64) {
    let c = cfg();
    let cell = cell();
    let at_lo = FRAC_PI_4.sin().powi(2);
    let n = 2000;
    let times: Vec<f64> = (0..n)
        .map(|i| {
            let at = at_lo + (AT_MAX - at_lo) * i as f64 / (n - 1) as f64;
            let p = OrbitParam::from_energy(2.0 * at - 1.0).unwrap();
            branch_time(&cell, id, &p, &c).unwrap()
        })
        .collect();
    for w in times.windows(3) {
        assert!(
            w[2] - 2.0 * w[1] + w[0] > 0.0,
            "second difference not positive on {id}"
        );
    }
    let mut sign_changes = 0;
    let mut prev_sign = 0i8;
    for w in times.windows(2) {
        let s = if w[1] > w[0] { 1 } else { -1 };
        if prev_sign != 0 && s != prev_sign {
            sign_changes += 1;
        }
        prev_sign = s;
    }
    assert_eq!(sign_changes, 1, "first-difference sign changes on {id}");

    let sn = find_saddle_node(&cell, id, &c).unwrap();
    let at_sn = sn.param_at_min.alpha_tilde().unwrap();
    for delta in [-1e-3, 1e-3] {
        let p = OrbitParam::from_energy(2.0 * (at_sn + delta) - 1.0).unwrap();
        let t = branch_time(&cell, id, &p, &c).unwrap();
        assert!(
            t > sn.t_min,
            "{id}: T({at_sn} + {delta}) = {t} not above T_min = {}",
            sn.t_min
        );
    }
    assert!(
        sn.l_sn < 0.5 * t_limit,
        "{id}: L_sn = {} not below {t_limit_name}/2 = {}",
        sn.l_sn,
        0.5 * t_limit
    );
}

#[test]
fn c07_convexity_and_unique_fold() {
    let c = cfg();
    let crit0 = critical_times(&cell(), 0, &c).unwrap();
    convexity_checks(BranchId::new(BranchKind::Cl, 0), "T^*0", crit0.t_upper);
    let crit1 = critical_times(&cell(), 1, &c).unwrap();
    convexity_checks(BranchId::new(BranchKind::A, 1), "T_*1", crit1.t_star);
    println!("ACCEPTANCE 07 PASS: Cl k=0 and A k=1 convex in alpha~ (2000-point grids), unique minimum, L_sn subcritical");
}

#[test]
fn c08_shooting_validation() {
    let c = cfg();
    let cell = cell();
    let diagram = build_diagram(&cell, 2, 7.0, 176, false, &c).unwrap();
    let n_points: usize = diagram.branches.iter().map(|g| g.points.len()).sum();
    assert!(n_points >= 1200, "only {n_points} points in the k_max=2 diagram");
    assert_eq!(diagram.branches.len(), 12);
    assert_eq!(diagram.criticals.len(), 3);
    let saddle_ids: Vec<BranchId> = diagram.saddles.iter().map(|s| s.branch).collect();
    assert_eq!(
        saddle_ids,
        vec![
            BranchId::new(BranchKind::A, 1),
            BranchId::new(BranchKind::A, 2),
            BranchId::new(BranchKind::Cl, 0),
            BranchId::new(BranchKind::Cl, 1),
            BranchId::new(BranchKind::Cl, 2),
        ]
    );
    let mut worst = 0.0_f64;
    for group in &diagram.branches {
        for point in &group.points {
            let res = shoot_check(&cell, point).unwrap();
            assert!(
                res <= 1e-6,
                "{} point at L = {} has residual {res:e}",
                group.id,
                point.half_length
            );
            worst = worst.max(res);
        }
    }
    println!(
        "ACCEPTANCE 08 PASS: all {n_points} points of the k_max=2 diagram shoot within 1e-6 (max residual {worst:.2e})"
    );
}

#[test]
fn c09_fold_multiplicity() {
    let c = cfg();
    let cell = cell();
    let id = BranchId::new(BranchKind::Cl, 0);
    let sn = find_saddle_node(&cell, id, &c).unwrap();
    let crit = critical_times(&cell, 0, &c).unwrap();
    let l_upper = 0.5 * crit.t_upper;
    for i in 1..=20 {
        let l = sn.l_sn + (l_upper - sn.l_sn) * i as f64 / 21.0;
        let roots = solve_at_l(&cell, id, l, &c).unwrap();
        assert_eq!(roots.len(), 2, "expected 2 roots at L = {l}");
        for r in &roots {
            let t = branch_time(&cell, id, r, &c).unwrap();
            assert!((t - 2.0 * l).abs() <= 1e-10 * (1.0 + 2.0 * l));
        }
    }
    assert_eq!(solve_at_l(&cell, id, sn.l_sn, &c).unwrap().len(), 1);
    assert_eq!(solve_at_l(&cell, id, l_upper, &c).unwrap().len(), 1);
    assert_eq!(solve_at_l(&cell, id, sn.l_sn - 1e-4, &c).unwrap().len(), 0);
    assert_eq!(solve_at_l(&cell, id, 0.5 * sn.l_sn, &c).unwrap().len(), 0);
    println!(
        "ACCEPTANCE 09 PASS: Cl k=0 multiplicity 2 on (L_sn, T^*0/2), 1 at the endpoints, 0 below L_sn"
    );
}

#[test]
fn c10_stability_concordance() {
    let c = cfg();
    let cell = cell();

    // Maginu classification across the families
    let classify_at = |kind, k, at: f64| {
        let p = OrbitParam::from_energy(2.0 * at - 1.0).unwrap();
        classify(&cell, BranchId::new(kind, k), &p, &c).unwrap().verdict
    };
    assert_eq!(classify_at(BranchKind::A, 0, 0.7), Stability::AsymptoticallyStable);
    assert_eq!(classify_at(BranchKind::Cr, 0, 0.6), Stability::AsymptoticallyStable);
    assert_eq!(classify_at(BranchKind::Cr, 0, 0.9), Stability::AsymptoticallyStable);
    assert_eq!(classify_at(BranchKind::D, 0, 0.7), Stability::Unstable);
    for kind in BranchKind::ALL {
        for k in [1u32, 2] {
            assert_eq!(classify_at(kind, k, 0.75), Stability::Unstable, "{kind:?} k={k}");
        }
    }
    // the Cl k=0 verdict flips exactly at the fold
    let sn = find_saddle_node(&cell, BranchId::new(BranchKind::Cl, 0), &c).unwrap();
    let at_sn = sn.param_at_min.alpha_tilde().unwrap();
    assert_eq!(classify_at(BranchKind::Cl, 0, at_sn - 1e-6), Stability::Unstable);
    assert_eq!(
        classify_at(BranchKind::Cl, 0, at_sn + 1e-6),
        Stability::AsymptoticallyStable
    );

    // relaxation panel: 12 points spanning all kinds, k in {0, 1}, both fold
    // sides and the open regime
    let panel: Vec<(BranchKind, u32, f64, usize, RelaxOutcome)> = vec![
        (BranchKind::A, 0, 0.8, 0, RelaxOutcome::ReturnedToStart),
        (BranchKind::A, 0, 0.3, 0, RelaxOutcome::ReturnedToStart), // open regime
        (BranchKind::Cr, 0, 1.5, 0, RelaxOutcome::ReturnedToStart),
        (BranchKind::Cl, 0, 1.63, 0, RelaxOutcome::EscapedToOther), // lower fold root
        (BranchKind::Cl, 0, 1.63, 1, RelaxOutcome::ReturnedToStart), // upper fold root
        (BranchKind::Cl, 0, 2.2, 0, RelaxOutcome::ReturnedToStart),
        (BranchKind::D, 0, 1.8, 0, RelaxOutcome::EscapedToOther),
        (BranchKind::A, 1, 3.52, 0, RelaxOutcome::EscapedToOther),
        (BranchKind::A, 1, 3.52, 1, RelaxOutcome::EscapedToOther),
        (BranchKind::Cr, 1, 3.7, 0, RelaxOutcome::EscapedToOther),
        (BranchKind::Cl, 1, 4.4, 0, RelaxOutcome::EscapedToOther),
        (BranchKind::D, 1, 4.5, 0, RelaxOutcome::EscapedToOther),
    ];
    assert_eq!(panel.len(), 12);
    let mut conclusive = 0;
    for &(kind, k, l, root_idx, expected) in &panel {
        let id = BranchId::new(kind, k);
        let roots = solve_at_l(&cell, id, l, &c).unwrap();
        assert!(root_idx < roots.len(), "{id} at L={l}: root {root_idx} missing");
        let point = point_at(&cell, id, roots[root_idx], &c).unwrap();

        // zero-count concordance on the shot orbit
        let trace = twistmap::integrate_orbit(
            (-cell.phi0(), point.y_minus),
            2.0 * point.half_length,
            1e-11,
        )
        .unwrap();
        assert!(trace.energy_drift <= 1e-8, "{id}: drift {:e}", trace.energy_drift);
        assert_eq!(
            trace.y_sign_changes() as u32,
            zero_count(id),
            "{id}: y sign changes vs combinatorial zero count"
        );

        let run = relax(&cell, &point, 0.02, 30.0, 201).unwrap();
        if run.outcome != RelaxOutcome::Inconclusive {
            conclusive += 1;
            assert_eq!(
                run.outcome, expected,
                "{id} at L={l} root {root_idx}: relaxation contradicts theory"
            );
            // relaxation must agree with the Maginu verdict
            match point.stability {
                Stability::AsymptoticallyStable => {
                    assert_eq!(run.outcome, RelaxOutcome::ReturnedToStart, "{id} at L={l}")
                }
                Stability::Unstable => {
                    assert_eq!(run.outcome, RelaxOutcome::EscapedToOther, "{id} at L={l}")
                }
                Stability::Undetermined => {}
            }
        }
    }
    assert!(conclusive >= 10, "only {conclusive}/12 relaxation runs conclusive");
    println!(
        "ACCEPTANCE 10 PASS: Maginu verdicts reproduced; relaxation concurs on {conclusive}/12 panel points (no contradictions)"
    );
}

#[test]
fn c10b_zero_count_concordance() {
    let c = cfg();
    let cell = cell();
    let panel: Vec<(BranchKind, u32, f64)> = vec![
        (BranchKind::A, 0, 0.72),
        (BranchKind::Cr, 0, 0.62),
        (BranchKind::Cl, 0, 0.62),
        (BranchKind::D, 0, 0.72),
        (BranchKind::A, 1, 0.62),
        (BranchKind::Cr, 1, 0.7),
        (BranchKind::Cl, 1, 0.7),
        (BranchKind::D, 1, 0.62),
        (BranchKind::A, 2, 0.66),
        (BranchKind::Cr, 2, 0.66),
        (BranchKind::Cl, 2, 0.66),
        (BranchKind::D, 2, 0.66),
    ];
    for &(kind, k, at) in &panel {
        let id = BranchId::new(kind, k);
        let p = OrbitParam::from_energy(2.0 * at - 1.0).unwrap();
        let point = point_at(&cell, id, p, &c).unwrap();
        let profile = twistmap::equilibrium_profile(&cell, &point, 400).unwrap();
        // count interior turning points of the profile
        let turns = profile
            .windows(3)
            .filter(|w| (w[1] - w[0]).signum() != (w[2] - w[1]).signum())
            .count();
        assert_eq!(
            turns as u32,
            zero_count(id),
            "{id}: profile turning points vs combinatorial count"
        );
    }
    println!("ACCEPTANCE 10b PASS: orbit turning points match combinatorial zero counts on a 12-point panel over k = 0, 1, 2");
}

#[test]
fn c11_mirror_symmetry() {
    let c = cfg();
    let canonical = build_diagram(&cell(), 1, 6.0, 64, false, &c).unwrap();
    let mirrored_cell = CellParams::new(FRAC_PI_4, FRAC_PI_6).unwrap();
    let direct = build_diagram(&mirrored_cell, 1, 6.0, 64, false, &c).unwrap();
    let transformed = mirror_diagram(&canonical);

    assert_eq!(direct.branches.len(), transformed.branches.len());
    for (g, h) in direct.branches.iter().zip(&transformed.branches) {
        assert_eq!(g.id, h.id);
        assert_eq!(g.points.len(), h.points.len(), "{} point count", g.id);
        for (p, q) in g.points.iter().zip(&h.points) {
            assert!((p.half_length - q.half_length).abs() < 1e-10);
            assert!((p.param.energy() - q.param.energy()).abs() < 1e-10);
            assert!((p.y_minus - q.y_minus).abs() < 1e-10);
            assert!((p.y_plus - q.y_plus).abs() < 1e-10);
            assert_eq!(p.stability, q.stability);
        }
    }
    for (a, b) in direct.criticals.iter().zip(&transformed.criticals) {
        assert!((a.t_star - b.t_star).abs() < 1e-10);
        assert!((a.t_upper - b.t_upper).abs() < 1e-10);
        assert!((a.y_abs - b.y_abs).abs() < 1e-10);
    }
    assert_eq!(direct.saddles.len(), transformed.saddles.len());
    for (a, b) in direct.saddles.iter().zip(&transformed.saddles) {
        assert_eq!(a.branch, b.branch);
        assert!((a.l_sn - b.l_sn).abs() < 1e-9);
    }
    println!("ACCEPTANCE 11 PASS: the (pi/4, pi/6) diagram equals the mirror transform of the (pi/6, pi/4) diagram pointwise");
}

#[test]
fn c12_classical_limit() {
    let c = cfg();
    let phi1 = 1e-3;
    let l_crit = quarter_period(phi1, &c).unwrap(); // 2L = 2T(phi1) in the symmetric cell
    let lambda = lambda_of_l(l_crit).unwrap();
    let err = (lambda - PI * PI).abs();
    assert!(err < 1e-3, "lambda = {lambda}, pi^2 = {}, err = {err}", PI * PI);
    println!(
        "ACCEPTANCE 12 PASS: symmetric critical lambda at phi1 = 1e-3 is {lambda:.8} (pi^2 within {err:.1e})"
    );
}

#[test]
fn c02b_separatrix_continuity() {
    // continuity of the time above/below the separatrix, part of the
    // monotonicity package
    let c = cfg();
    let phi = 0.6;
    let mut prev = f64::INFINITY;
    for eps in [1e-4, 1e-6, 1e-8] {
        let above = time_above(SQRT_2 + eps, phi, &c).unwrap();
        let below = time_to_line(alpha_of_beta(SQRT_2 - eps).unwrap(), phi, &c).unwrap();
        let gap = (above - below).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-7);
    println!("ACCEPTANCE 02b PASS: T2 extension continuous across the separatrix (gap {prev:.2e} at eps = 1e-8)");
}
