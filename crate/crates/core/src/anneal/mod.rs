//! Deterministic annealing in beta.
//!
//! Stationary points of `G(q) + beta I(X;Y_N)` on the simplex product are
//! found by the self-consistent update `q <- softmax(beta grad I / p_k)`
//! (with a `p(nu)` prior for the bottleneck) and tracked as beta grows.

mod engine;
mod fixed_point;
mod point;

pub use engine::{anneal, AnnealOutcome, AnnealSchedule, Branch, Provenance};
pub use fixed_point::{
    fixed_point_update, kkt_residual, lagrange_multipliers, stationarity_multipliers,
};
pub use point::{continue_at_beta, solve_at_beta, SolverSettings, StationaryPoint};

pub(crate) use fixed_point::residual_ws;
