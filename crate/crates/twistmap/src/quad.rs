//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss rule is applied on a
//! panel list; the panel with the largest error estimate is bisected until the
//! global estimate meets the tolerance. Callers may seed the initial partition
//! with breakpoints so that known boundary layers start out resolved.

// published 33-digit rule constants
#![allow(clippy::excessive_precision)]

/// 15-point Kronrod abscissae on [0, 1] (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// 7-point Gauss weights (matching the odd-index Kronrod nodes).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod weights.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// QUADPACK-style error rescaling: sharpens the raw |K15 - G7| difference
/// using the integral of |f - mean| over the panel.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One Gauss–Kronrod panel evaluation; returns (integral, error estimate,
/// integral of |f|).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    for (j, wg) in WG.iter().enumerate().take(3) {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    res_gauss += WG[3] * f_center;

    for j in 0..4 {
        let jtwm1 = 2 * j;
        if jtwm1 == 7 {
            continue;
        }
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = ((res_kronrod - res_gauss) * half).abs();
    (
        res_kronrod * half,
        rescale_error(err, res_abs * half.abs(), res_asc * half.abs()),
        res_abs * half.abs(),
    )
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    res_abs: f64,
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    /// Bisections performed on top of the seeded partition.
    pub subdivisions: usize,
}

/// Integrate `f` over [a, b].
///
/// `breakpoints` seeds the initial partition (values outside (a, b) are
/// ignored); `max_subdivisions` caps the number of adaptive bisections.
/// Fails with `None` when the tolerance `max(abs_tol, rel_tol * |I|)` is
/// still unmet after exhausting the budget.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Option<Quadrature> {
    if a == b {
        return Some(Quadrature {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();

    let mut panels: Vec<Panel> = cuts
        .windows(2)
        .map(|w| {
            let (v, e, ra) = qk15(f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
                res_abs: ra,
            }
        })
        .collect();

    let mut splits = 0usize;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = abs_tol.max(rel_tol * total.abs());
        // roundoff floor: below it further bisection cannot help
        let floor: f64 = 100.0 * f64::EPSILON * panels.iter().map(|p| p.res_abs).sum::<f64>();
        if err <= tol.max(floor) {
            return Some(Quadrature {
                value: total,
                error: err,
                subdivisions: splits,
            });
        }
        if splits >= max_subdivisions {
            return None;
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Panel no longer representable; accept what we have.
            return Some(Quadrature {
                value: total,
                error: err,
                subdivisions: splits,
            });
        }
        let (lv, le, lra) = qk15(f, pa, mid);
        let (rv, re, rra) = qk15(f, mid, pb);
        panels[worst] = Panel {
            a: pa,
            b: mid,
            value: lv,
            error: le,
            res_abs: lra,
        };
        panels.push(Panel {
            a: mid,
            b: pb,
            value: rv,
            error: re,
            res_abs: rra,
        });
        splits += 1;
    }
}

/// Geometric breakpoints accumulating toward `end` from distance `span` down
/// to `scale` (three per octave), clipped to the open interval (lo, hi). Used
/// to pre-resolve integrable boundary layers of width `scale`: on each
/// resulting panel the distance to the layer is comparable to the panel
/// width, which keeps the Gauss–Kronrod estimates well inside tolerance.
pub fn dyadic_seeds(end: f64, span: f64, scale: f64, lo: f64, hi: f64) -> Vec<f64> {
    const RATIO: f64 = 0.793_700_525_984_099_8; // 2^(-1/3)
    let mut seeds = Vec::new();
    if !(scale > 0.0) || !(span > scale) {
        return seeds;
    }
    // descend well below the layer scale so the innermost panel is flat
    let stop = scale / 64.0;
    let mut d = span;
    while d > stop && seeds.len() < 500 {
        for &x in &[end - d, end + d] {
            if x > lo && x < hi {
                seeds.push(x);
            }
        }
        d *= RATIO;
    }
    seeds
}
