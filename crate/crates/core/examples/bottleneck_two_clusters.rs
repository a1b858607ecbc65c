//! Information Bottleneck on a two-cluster joint: a single split at the
//! critical temperature, followed by the relevance-compression curve.
//!
//! ```bash
//! cargo run --release --example bottleneck_two_clusters
//! ```

use infodist::anneal::{anneal, AnnealSchedule};
use infodist::curve::{build_curve, verify_theorem3, CurveSpec, SolverOptions};
use infodist::dataset::{gen_four_gaussian, GaussianMixtureSpec};
use infodist::spectral::critical_beta;
use infodist::ObjectiveKind;

fn main() -> infodist::Result<()> {
    let kind = ObjectiveKind::InformationBottleneck;
    let p = gen_four_gaussian(&GaussianMixtureSpec::diagonal(2, 0.1, (16, 16)))?;
    let predicted = critical_beta(&p).expect("informative joint").beta;

    let schedule = AnnealSchedule {
        beta_max: 4.0,
        ..AnnealSchedule::default()
    };
    let outcome = anneal(kind, &p, 2, &schedule)?;
    println!("predicted split at beta = {predicted:.6}");
    for e in &outcome.events {
        println!("found {:?} at beta = {:.6}", e.kind, e.beta);
    }
    let last = outcome
        .branches
        .last()
        .and_then(|b| b.points.last())
        .expect("non-empty");
    println!(
        "at beta = {:.1}: I(X;Y_N) = {:.4} of {:.4}",
        last.beta,
        last.information,
        p.mutual_information()
    );

    let spec = CurveSpec {
        kind,
        i0_min: 0.005,
        i0_max: 0.3,
        points: 60,
        solver: SolverOptions::default(),
        anneal: None,
        ..CurveSpec::default()
    };
    let curve = build_curve(&spec, &p)?;
    let report = verify_theorem3(&curve.points)?;
    let first = &curve.points[0];
    let end = curve.points.last().expect("non-empty");
    println!(
        "R_I from {:.4} (beta {:.4}) to {:.4} (beta {:.4}); max rel err {:.1e}; sign changes {}",
        first.r,
        first.beta,
        end.r,
        end.beta,
        report.max_rel_err,
        report.sign_changes.len()
    );
    Ok(())
}
