//! Bifurcation structure of the planar pendulum two-point boundary value
//! problem
//!
//! ```text
//! x' = y,  y' = -sin 2x,      x(-L) = -phi0,  x(L) = phi1
//! ```
//!
//! with asymmetric Dirichlet angles phi0, phi1 in (0, pi/2). Solutions are
//! found by inverting explicit transit-time formulas built from three time
//! maps of the conservative phase plane; the crate traces the four solution
//! families (with any winding number), locates their saddle-node folds,
//! classifies stability from turning-point counts and time-map slopes, and
//! cross-checks everything against independent shooting and relaxation
//! oracles. Exporters emit the resulting diagrams as CSV, JSON and SVG.
//!
//! All computational surfaces are pure functions over immutable inputs and
//! are safe to call from parallel workers.

// domain guards are written as negated comparisons so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod continuation;
pub mod error;
pub mod io;
pub mod oracles;
pub mod quad;
pub mod stability;
pub mod timemaps;

pub use branch::{
    branch_domain, branch_time, branch_time_d_alpha, branch_time_d_alpha_tilde, critical_times,
    endpoint_ordinates, has_fold, l_of_lambda, lambda_of_l, mirror_point, BranchDomain, BranchId,
    BranchKind, BranchPoint, CriticalOrbits,
};
pub use continuation::{
    build_diagram, find_saddle_node, mirror_diagram, point_at, solve_at_l, trace_branch,
    BranchGroup, Diagram, SaddleNode,
};
pub use error::{Error, Result};
pub use oracles::{
    equilibrium_profile, integrate_orbit, quad_oracle, relax, shoot_check, OracleQuery,
    OrbitTrace, RelaxOutcome, RelaxationRun,
};
pub use stability::{classify, zero_count, Stability, StabilityVerdict, ZeroRule};
pub use timemaps::{
    alpha_of_beta, beta_of_alpha, d_quarter_period, d_time_to_line_dalpha, quarter_period,
    time_above, time_to_line, CellParams, OrbitParam, QuadConfig, Regime,
};
