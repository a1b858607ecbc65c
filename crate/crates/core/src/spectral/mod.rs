//! Second-order tests at stationary points and bifurcation detection.
//!
//! A stationary point maximizes the annealed Lagrangian if the Hessian of
//! `G + beta I` is negative definite on the tangent space of the
//! normalization constraints, and maximizes the information-constrained
//! problem if it is negative definite on the smaller space that is also
//! orthogonal to `grad I`. The first test implies the second.

mod bifurcation;
mod classify;
mod kernel;

pub use bifurcation::{
    critical_beta, detect_bifurcations, BifurcationEvent, BifurcationKind, CriticalPoint,
    BETA_RESOLUTION,
};
pub use classify::{
    classify_quantizer, classify_stationary_point, lagrangian_spectrum, SpectralClassification,
    Verdict, DEFAULT_TOL_EIG,
};
pub use kernel::{kernel_basis, KernelBasis, KernelKind, DEGENERATE_GRADIENT};
