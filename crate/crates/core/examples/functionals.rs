//! Information functionals, their gradients and the Euler identities on a
//! small hand-written joint distribution.
//!
//! ```bash
//! cargo run --example functionals
//! ```

use infodist::prob::{
    compression_information, conditional_entropy, grad_compression_information,
    grad_conditional_entropy, grad_mutual_information, mutual_information,
};
use infodist::{JointDistribution, Quantizer};
use nalgebra::DMatrix;

fn main() -> infodist::Result<()> {
    // Rows index X, columns index Y.
    let p = JointDistribution::new(DMatrix::from_row_slice(
        3,
        4,
        &[
            0.20, 0.05, 0.02, 0.01, //
            0.03, 0.15, 0.10, 0.02, //
            0.01, 0.02, 0.09, 0.30,
        ],
    ))?;
    println!(
        "I(X;Y) = {:.6} nats, H(Y) = {:.6} nats",
        p.mutual_information(),
        p.entropy_y()
    );

    let q = Quantizer::new(DMatrix::from_row_slice(
        2,
        4,
        &[0.9, 0.7, 0.3, 0.1, 0.1, 0.3, 0.7, 0.9],
    ))?;
    let i = mutual_information(&p, &q)?;
    let h = conditional_entropy(&p, &q)?;
    let c = compression_information(&p, &q)?;
    println!("I(X;Y_N) = {i:.6}  H(Y_N|Y) = {h:.6}  I(Y;Y_N) = {c:.6}");

    // All three are homogeneous in q up to a constant.
    let dot = |g: DMatrix<f64>| g.dot(q.matrix());
    println!(
        "q.grad I - I           = {:+.2e}",
        dot(grad_mutual_information(&p, &q)?) - i
    );
    println!(
        "q.grad H - (H - 1)     = {:+.2e}",
        dot(grad_conditional_entropy(&p, &q)?) - (h - 1.0)
    );
    println!(
        "q.grad I(Y;Y_N) - I(Y;Y_N) = {:+.2e}",
        dot(grad_compression_information(&p, &q)?) - c
    );

    let hard = Quantizer::deterministic(2, &[0, 0, 1, 1])?;
    println!(
        "hard split {{0,1}} {{2,3}}: I(X;Y_N) = {:.6}, H(Y_N|Y) = {:.1e}",
        mutual_information(&p, &hard)?,
        conditional_entropy(&p, &hard)?
    );
    Ok(())
}
