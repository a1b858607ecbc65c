//! The first symmetry-breaking temperature from the uniform quantizer,
//! computed from the joint alone, checked against the closed form for a
//! binary symmetric channel and against the spectrum along the uniform
//! branch.
//!
//! ```bash
//! cargo run --release --example critical_beta
//! ```

use infodist::dataset::{binary_symmetric, gen_four_gaussian, GaussianMixtureSpec};
use infodist::spectral::{classify_quantizer, critical_beta, DEFAULT_TOL_EIG};
use infodist::{ObjectiveKind, Quantizer};

fn main() -> infodist::Result<()> {
    for eps in [0.05, 0.1, 0.2, 0.3] {
        let p = binary_symmetric(eps)?;
        let c = critical_beta(&p).expect("informative channel");
        println!(
            "BSC eps = {eps:.2}: beta* = {:.10}, 1/(1-2eps)^2 = {:.10}",
            c.beta,
            1.0 / (1.0 - 2.0 * eps).powi(2)
        );
    }

    let p = gen_four_gaussian(&GaussianMixtureSpec::default())?;
    let c = critical_beta(&p).expect("informative joint");
    println!("four-Gaussian beta* = {:.7}", c.beta);
    let u = Quantizer::uniform(2, p.y_size());
    for beta in [c.beta - 0.01, c.beta + 0.01] {
        let cl = classify_quantizer(
            ObjectiveKind::InformationDistortion,
            &p,
            &u,
            beta,
            DEFAULT_TOL_EIG,
        )?;
        println!(
            "  uniform at beta = {beta:.4}: top eigenvalue {:+.3e}, stable {}",
            cl.lagrangian_margin(),
            !cl.is_unstable()
        );
    }
    Ok(())
}
