//! Stability of the equilibria under the gradient flow, decided from the
//! turning-point count of the orbit segment and the slope of its transit
//! time.
//!
//! An equilibrium whose y(t) never vanishes on the half-open time interval is
//! asymptotically stable; two or more interior zeros force instability. With
//! exactly one interior zero the verdict follows the sign of the transit-time
//! derivative along the branch: increasing means stable, decreasing unstable.

use serde::{Deserialize, Serialize};

use crate::branch::{branch_time_d_alpha, has_fold, BranchId, BranchKind};
use crate::error::Result;
use crate::timemaps::{CellParams, OrbitParam, QuadConfig, Regime};

/// Derivative magnitudes below this are refused rather than signed.
const SLOPE_EPS: f64 = 1e-12;
/// Distance (in α) to the turning-point orbit below which the single-zero
/// slope is treated as the critical limit itself.
const CRITICAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    #[serde(rename = "stable")]
    AsymptoticallyStable,
    Unstable,
    Undetermined,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::AsymptoticallyStable => "stable",
            Stability::Unstable => "unstable",
            Stability::Undetermined => "undetermined",
        }
    }

    pub fn parse(s: &str) -> crate::error::Result<Self> {
        match s {
            "stable" => Ok(Stability::AsymptoticallyStable),
            "unstable" => Ok(Stability::Unstable),
            "undetermined" => Ok(Stability::Undetermined),
            _ => Err(crate::error::Error::Parse(format!(
                "unknown stability '{s}'"
            ))),
        }
    }
}

/// Which rule produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroRule {
    NoZeros,
    TwoOrMore,
    SingleZeroSlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Stability,
    pub zero_count: u32,
    pub rule: ZeroRule,
}

/// Number of zeros of y(t) in the open interval (-L, L), purely combinatorial:
/// each turning point of the segment contributes one, each full winding two.
pub fn zero_count(branch: BranchId) -> u32 {
    let base = match branch.kind {
        BranchKind::A => 0,
        BranchKind::Cr | BranchKind::Cl => 1,
        BranchKind::D => 2,
    };
    base + 2 * branch.k
}

/// Classify one branch point.
///
/// At exactly the turning-point orbit the single-zero families are labeled by
/// the boundary-zero convention: the γ_{*0} orbit (A/Cr junction) counts as
/// stable, the γ*_0 orbit is reported `Undetermined` because the slope
/// criterion degenerates there.
pub fn classify(
    cell: &CellParams,
    branch: BranchId,
    param: &OrbitParam,
    cfg: &QuadConfig,
) -> Result<StabilityVerdict> {
    let zc = zero_count(branch);
    if zc == 0 {
        return Ok(StabilityVerdict {
            verdict: Stability::AsymptoticallyStable,
            zero_count: zc,
            rule: ZeroRule::NoZeros,
        });
    }
    if zc >= 2 {
        return Ok(StabilityVerdict {
            verdict: Stability::Unstable,
            zero_count: zc,
            rule: ZeroRule::TwoOrMore,
        });
    }

    // single interior zero: Cr or Cl with k = 0
    let rule = ZeroRule::SingleZeroSlope;
    let alpha = match param.regime() {
        Regime::Closed => param.alpha().unwrap(),
        Regime::Open => {
            // unreachable for single-zero kinds through the public surface
            return Ok(StabilityVerdict {
                verdict: Stability::Undetermined,
                zero_count: zc,
                rule,
            });
        }
    };
    if alpha - cell.phi_max() < CRITICAL_EPS {
        // At the turning-point limit the monotone single-zero family meets
        // the stable A family (that junction orbit has no interior zero),
        // while the folded one meets D where the slope criterion degenerates.
        let verdict = if has_fold(cell, branch) {
            Stability::Undetermined
        } else {
            Stability::AsymptoticallyStable
        };
        return Ok(StabilityVerdict {
            verdict,
            zero_count: zc,
            rule,
        });
    }

    let slope = branch_time_d_alpha(cell, branch, alpha, cfg)?;
    let verdict = if slope > SLOPE_EPS {
        Stability::AsymptoticallyStable
    } else if slope < -SLOPE_EPS {
        Stability::Unstable
    } else {
        Stability::Undetermined
    };
    Ok(StabilityVerdict {
        verdict,
        zero_count: zc,
        rule,
    })
}
