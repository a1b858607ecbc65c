//! Builds `R_H(I0)` on the default four-Gaussian joint, checks
//! `dR/dI0 = -beta` and reports where `beta(I0)` turns around. Points left
//! of the turn are constrained optima that annealing never visits.
//!
//! ```bash
//! cargo run --release --example relevance_curve [points]
//! ```

use infodist::curve::{build_curve, curve_branches, verify_theorem3, CurveSpec, SolverOptions};
use infodist::dataset::{gen_four_gaussian, GaussianMixtureSpec};
use infodist::spectral::{
    classify_stationary_point, detect_bifurcations, Verdict, DEFAULT_TOL_EIG,
};
use infodist::ObjectiveKind;

fn main() -> infodist::Result<()> {
    let points = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let kind = ObjectiveKind::InformationDistortion;
    let p = gen_four_gaussian(&GaussianMixtureSpec::default())?;
    let spec = CurveSpec {
        kind,
        points,
        solver: SolverOptions {
            classes: 4,
            ..SolverOptions::default()
        },
        ..CurveSpec::default()
    };
    let curve = build_curve(&spec, &p)?;
    println!("{} points, {} gaps", curve.points.len(), curve.gaps.len());
    if let Some(a) = &curve.anneal {
        for e in &a.events {
            println!("anneal: {:?} at beta = {:.6}", e.kind, e.beta);
        }
    }

    let report = verify_theorem3(&curve.points)?;
    println!(
        "max |dR/dI0 + beta| / beta = {:.2e}, dbeta/dI0 changes sign at {:?}",
        report.max_rel_err, report.sign_changes
    );
    for b in curve_branches(&curve.points, 0) {
        for e in detect_bifurcations(kind, &p, &b, DEFAULT_TOL_EIG)? {
            println!(
                "curve: {:?} at beta = {:.6}, I = {:.4}",
                e.kind, e.beta, e.information
            );
        }
    }

    println!("{:>8} {:>10} {:>9}  verdict", "I0", "R", "beta");
    for cp in curve.points.iter().step_by(5) {
        let cl = classify_stationary_point(kind, &p, &cp.to_stationary_point(), DEFAULT_TOL_EIG)?;
        let tag = match cl.verdict() {
            Verdict::SolvesBoth => "annealing and constrained",
            Verdict::ConstrainedOnly => "constrained only",
            Verdict::Indeterminate => "indeterminate",
        };
        println!("{:8.4} {:10.6} {:9.5}  {tag}", cp.i0, cp.r, cp.beta);
    }
    Ok(())
}
