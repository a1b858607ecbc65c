//! Relevance-compression curves.
//!
//! For each `I0`, [`solve_constrained`] maximizes `G(q)` over quantizers
//! with `I(X;Y_N) = I0` (the inequality constraint is always active at a
//! maximizer). Newton runs on the joint KKT system in `(q, lambda, beta)`,
//! so each point also yields the multiplier `beta(I0)`. [`build_curve`]
//! sweeps a grid of `I0` values, and [`verify_theorem3`] checks
//! `dR/dI0 = -beta` and locates sign changes of `dbeta/dI0`.

mod analysis;
mod build;
mod solve;

pub use analysis::{
    beta_of_i0, curve_branches, identity_residual, lambda_slopes, smooth_segments, verify_theorem3,
    DerivativeSample, LambdaSlope, Segment, Theorem3Report, MIN_SEGMENT,
};
pub use build::{build_curve, Curve, CurveGap, CurveSpec};
pub use solve::{
    critical_seeds, max_information, random_seeds, solve_constrained, solve_constrained_seeded,
    solve_from_seeds, CurvePoint, Seed, SolverOptions,
};
