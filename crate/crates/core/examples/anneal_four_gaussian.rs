//! Anneals the default four-component Gaussian mixture with Information
//! Distortion and prints each branch and bifurcation.
//!
//! ```bash
//! cargo run --release --example anneal_four_gaussian
//! ```

use infodist::anneal::{anneal, AnnealSchedule};
use infodist::dataset::{gen_four_gaussian, GaussianMixtureSpec};
use infodist::ObjectiveKind;

fn main() -> infodist::Result<()> {
    let p = gen_four_gaussian(&GaussianMixtureSpec::default())?;
    println!("52x52 joint, I(X;Y) = {:.6} nats", p.mutual_information());

    let schedule = AnnealSchedule {
        beta_max: 3.0,
        ..AnnealSchedule::default()
    };
    let outcome = anneal(ObjectiveKind::InformationDistortion, &p, 4, &schedule)?;

    for b in &outcome.branches {
        let (lo, hi) = b.beta_range().unwrap_or((f64::NAN, f64::NAN));
        let last = b.points.last().expect("non-empty");
        println!(
            "branch {}: {:?}, signature {}, beta {lo:.4}..{hi:.4}, {} points, I at end {:.4}",
            b.id,
            b.provenance,
            b.signature,
            b.points.len(),
            last.information
        );
    }
    for e in &outcome.events {
        println!(
            "{:?} at beta = {:.6} (I = {:.2e}), parent {}, children {:?}",
            e.kind, e.beta, e.information, e.parent, e.children
        );
    }
    Ok(())
}
