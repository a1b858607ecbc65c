//! Annealing, bifurcation analysis and relevance-compression curves for the
//! Information Distortion and Information Bottleneck problems.
//!
//! Both problems quantize a source `Y` into `N` classes `Y_N` with a
//! stochastic map `q(Y_N | Y)`, trading an objective `G(q)` against the
//! information `I(X;Y_N)` the classes keep about a relevant variable `X`:
//!
//! | objective | `G(q)` | curve |
//! |-----------|--------|-------|
//! | Information Distortion | `H(Y_N \| Y)` | `R_H(I0) = max { H(Y_N\|Y) : I(X;Y_N) >= I0 }` |
//! | Information Bottleneck | `-I(Y;Y_N)` | `R_I(I0) = max { -I(Y;Y_N) : I(X;Y_N) >= I0 }` |
//!
//! The crate is organized as
//!
//! - [`prob`]: joint distributions, quantizers, functionals, gradients, Hessians;
//! - [`anneal`]: fixed-point solves of `max G + beta I` along a beta schedule;
//! - [`spectral`]: kernel-projected Hessian tests and bifurcation detection;
//! - [`curve`]: fixed-`I0` Newton solves, the curve `R(I0)`, the multiplier
//!   trace `beta(I0)` and derivative checks (`dR/dI0 = -beta`);
//! - [`dataset`]: the Gaussian-mixture generator, file formats and writers;
//! - [`checks`]: property suites shared by the `verify` command.
//!
//! All information quantities are in nats.
//!
//! ```
//! use infodist::prob::{mutual_information, JointDistribution, Quantizer};
//! use nalgebra::DMatrix;
//!
//! let p = JointDistribution::new(DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
//! let q = Quantizer::deterministic(2, &[0, 1]).unwrap();
//! assert!((mutual_information(&p, &q).unwrap() - 2f64.ln()).abs() < 1e-15);
//! ```

pub mod anneal;
pub mod checks;
pub mod curve;
pub mod dataset;
mod error;
mod kkt;
pub mod prob;
pub mod spectral;

pub use error::{Error, Result};
pub use prob::{JointDistribution, ObjectiveKind, Quantizer};
