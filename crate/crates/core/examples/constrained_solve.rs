//! Solves the fixed-information problem at a few values of `I0` and shows
//! the multiplier `beta` returned with each solution.
//!
//! ```bash
//! cargo run --release --example constrained_solve
//! ```

use infodist::curve::{max_information, solve_constrained, SolverOptions};
use infodist::dataset::{gen_four_gaussian, GaussianMixtureSpec};
use infodist::ObjectiveKind;

fn main() -> infodist::Result<()> {
    let p = gen_four_gaussian(&GaussianMixtureSpec::diagonal(3, 0.12, (24, 24)))?;
    let opts = SolverOptions {
        classes: 3,
        ..SolverOptions::default()
    };
    println!(
        "I(X;Y) = {:.4}, reachable with 3 classes ~ {:.4}",
        p.mutual_information(),
        max_information(&p, 3, 0)
    );

    let mut warm = None;
    for i0 in [0.002, 0.01, 0.05, 0.1, 0.2] {
        let cp = solve_constrained(
            ObjectiveKind::InformationDistortion,
            &p,
            i0,
            warm.as_ref(),
            &opts,
        )?;
        println!(
            "I0 = {i0:.3}: R = {:.6}, beta = {:.5}, |I - I0| = {:.1e}, KKT {:.1e}",
            cp.r,
            cp.beta,
            (cp.information - i0).abs(),
            cp.kkt_residual
        );
        warm = Some(cp.q);
    }
    Ok(())
}
