//! Problem data and information functionals.
//!
//! A [`JointDistribution`] holds the fixed joint `p(X, Y)`; a [`Quantizer`]
//! is the optimization variable `q(Y_N | Y)`, an `N x K` column-stochastic
//! matrix. All information quantities are in nats.
//!
//! Flattened coordinates (Hessians, kernel bases) use the class-major order
//! `index = nu * K + k`, so the Hessian of `I(X;Y_N)` is block diagonal with
//! one `K x K` block per class.

pub(crate) mod functionals;
mod joint;
mod quantizer;

pub use functionals::{
    compression_information, conditional_entropy, grad_compression_information,
    grad_conditional_entropy, grad_mutual_information, grad_objective, hessian_lagrangian,
    hessian_mutual_information, mutual_information, objective_value, ObjectiveKind, PROB_FLOOR,
};
pub use joint::JointDistribution;
pub use quantizer::{Quantizer, SymmetrySignature};
