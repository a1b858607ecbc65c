//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! ```bash
//! cargo test --test acceptance
//! ```

mod common;

use std::fmt::Write as _;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{grid_search_rh, lambda_oracle, sharp_joint};
use infodist::anneal::{anneal, AnnealOutcome, AnnealSchedule};
use infodist::checks::{euler_suite, gradient_suite, theorem1_suite};
use infodist::curve::{
    build_curve, curve_branches, lambda_slopes, max_information, smooth_segments,
    solve_constrained, verify_theorem3, Curve, CurvePoint, CurveSpec, SolverOptions,
};
use infodist::dataset::{gen_four_gaussian, GaussianMixtureSpec};
use infodist::spectral::{
    classify_stationary_point, detect_bifurcations, BifurcationKind, Verdict, DEFAULT_TOL_EIG,
};
use infodist::{JointDistribution, ObjectiveKind};

const ID: ObjectiveKind = ObjectiveKind::InformationDistortion;
const IB: ObjectiveKind = ObjectiveKind::InformationBottleneck;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Data shared by several criteria.
struct Runs {
    joint: JointDistribution,
    two_clusters: JointDistribution,
    anneal_id: AnnealOutcome,
    anneal_ib: AnnealOutcome,
    curve: Curve,
    curve_fine: Curve,
    curve_secs: f64,
    grid_points: Vec<CurvePoint>,
}

fn curve_spec(points: usize) -> CurveSpec {
    CurveSpec {
        kind: ID,
        i0_min: 0.001,
        i0_max: 0.1,
        points,
        solver: SolverOptions {
            classes: 4,
            ..SolverOptions::default()
        },
        ..CurveSpec::default()
    }
}

fn euler() -> Outcome {
    let t = Instant::now();
    let records = euler_suite(11, 1000).expect("suite runs");
    let secs = t.elapsed().as_secs_f64();
    let worst = records.iter().map(|r| r.value).fold(0.0, f64::max);
    outcome(
        records.iter().all(|r| r.passed) && secs < 10.0,
        format!("1000 instances, worst {worst:.1e} < 1e-10, {secs:.1} s < 10 s"),
    )
}

fn gradients() -> Outcome {
    let t = Instant::now();
    let records = gradient_suite(12, 100).expect("suite runs");
    let secs = t.elapsed().as_secs_f64();
    let mut detail = String::from("100 instances");
    for r in &records {
        let limit = r.threshold.unwrap_or(f64::NAN);
        write!(detail, ", {} {:.1e} < {limit:.0e}", r.name, r.value).unwrap();
    }
    write!(detail, ", {secs:.1} s < 30 s").unwrap();
    outcome(records.iter().all(|r| r.passed) && secs < 30.0, detail)
}

fn kkt_fidelity(runs: &Runs) -> Outcome {
    let mut worst_grad = 0.0f64;
    let mut worst_lambda = 0.0f64;
    let mut count = 0usize;
    for (kind, p, o) in [
        (ID, &runs.joint, &runs.anneal_id),
        (IB, &runs.two_clusters, &runs.anneal_ib),
    ] {
        for (_, sp) in o.points() {
            count += 1;
            worst_grad = worst_grad.max(sp.kkt_residual);
            if kind == ID {
                let lam = lambda_oracle(p.matrix(), sp.q.matrix(), sp.beta);
                for (a, b) in sp.lambda.iter().zip(&lam) {
                    worst_lambda = worst_lambda.max((a - b).abs());
                }
            }
        }
    }
    let sharp = sharp_joint();
    let curves = [
        (&runs.joint, runs.curve.points.as_slice()),
        (&runs.joint, runs.curve_fine.points.as_slice()),
        (&sharp, runs.grid_points.as_slice()),
    ];
    for (p, points) in curves {
        for cp in points {
            count += 1;
            worst_grad = worst_grad.max(cp.kkt_residual);
            let lam = lambda_oracle(p.matrix(), cp.q.matrix(), cp.beta);
            for (a, b) in cp.lambda.iter().zip(&lam) {
                worst_lambda = worst_lambda.max((a - b).abs());
            }
        }
    }
    outcome(
        worst_grad < 1e-7 && worst_lambda < 1e-8,
        format!(
            "{count} points, gradient residual {worst_grad:.1e} < 1e-7, \
             multipliers vs closed form {worst_lambda:.1e} < 1e-8"
        ),
    )
}

fn active_constraint(runs: &Runs) -> Outcome {
    let all = runs
        .curve
        .points
        .iter()
        .chain(&runs.curve_fine.points)
        .chain(&runs.grid_points);
    let (n, worst) = all.fold((0, 0.0f64), |(n, w), cp| {
        (n + 1, w.max((cp.information - cp.i0).abs()))
    });
    outcome(
        worst < 1e-8,
        format!("{n} curve points, |I - I0| {worst:.1e} < 1e-8"),
    )
}

fn grid_oracle(runs: &mut Runs) -> Outcome {
    let t = Instant::now();
    let p = sharp_joint();
    let top = max_information(&p, 2, 0);
    let targets: Vec<f64> = (1..=10).map(|i| top * i as f64 / 11.0).collect();
    let best = grid_search_rh(p.matrix(), 0.005, &targets, 2e-3);
    let mut worst = 0.0f64;
    let mut missing = 0;
    let mut warm = None;
    for (&i0, oracle) in targets.iter().zip(best) {
        let cp = solve_constrained(ID, &p, i0, warm.as_ref(), &SolverOptions::default())
            .expect("feasible target");
        match oracle {
            Some(o) => worst = worst.max((cp.r - o).abs()),
            None => missing += 1,
        }
        warm = Some(cp.q.clone());
        runs.grid_points.push(cp);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst < 5e-3 && missing == 0 && secs < 120.0,
        format!("K = 3, N = 2, 10 targets, max |R - grid| {worst:.2e} < 5e-3, {secs:.1} s < 120 s"),
    )
}

fn monotone_and_refinable(runs: &Runs) -> Outcome {
    let mut rise = f64::NEG_INFINITY;
    for c in [&runs.curve, &runs.curve_fine] {
        for w in c.points.windows(2) {
            rise = rise.max(w[1].r - w[0].r);
        }
    }
    // The refined grid contains every coarse I0 at even positions.
    let fine: std::collections::HashMap<u64, &CurvePoint> =
        smooth_segments(&runs.curve_fine.points)
            .into_iter()
            .filter(|s| s.len() >= 5)
            .flatten()
            .map(|cp| ((cp.i0 * 1e7).round() as u64, cp))
            .collect();
    let mut compared = 0;
    let mut change = 0.0f64;
    for seg in smooth_segments(&runs.curve.points) {
        if seg.len() < 5 {
            continue;
        }
        for cp in seg {
            if let Some(f) = fine.get(&((cp.i0 * 1e7).round() as u64)) {
                compared += 1;
                change = change.max((f.r - cp.r).abs());
            }
        }
    }
    outcome(
        rise <= 1e-6 && change <= 1e-3 && compared > 0,
        format!(
            "largest increase {rise:.1e} <= 1e-6, refinement change {change:.1e} <= 1e-3 \
             over {compared} shared points"
        ),
    )
}

fn derivative_and_subcritical(runs: &Runs) -> Outcome {
    let mut detail = String::new();
    let report = match verify_theorem3(&runs.curve.points) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("no smooth segment: {e}")),
    };
    write!(
        detail,
        "|dR/dI0 + beta|/beta {:.1e} < 1e-2, {} sign change(s) of dbeta/dI0",
        report.max_rel_err,
        report.sign_changes.len()
    )
    .unwrap();

    let anneal = runs.curve.anneal.as_ref().expect("seeding anneal");
    let Some(pitchfork) = anneal
        .events
        .iter()
        .find(|e| e.kind == BifurcationKind::PitchforkLike && !e.children.is_empty())
    else {
        return outcome(false, format!("{detail}; no symmetry breaking found"));
    };
    let child = &anneal.branches[pitchfork.children[0]];

    let mut saddle = None;
    for b in curve_branches(&runs.curve.points, anneal.branches.len()) {
        let events = detect_bifurcations(ID, &runs.joint, &b, DEFAULT_TOL_EIG).expect("scan");
        if let Some(e) = events
            .iter()
            .find(|e| e.kind == BifurcationKind::SaddleNode)
        {
            if b.signature == child.signature {
                saddle = Some(e.clone());
            }
        }
    }
    let Some(saddle) = saddle else {
        return outcome(
            false,
            format!("{detail}; no turning point on the split branch"),
        );
    };
    write!(
        detail,
        ", pitchfork beta* = {:.6}, saddle-node beta** = {:.6} ({})",
        pitchfork.beta, saddle.beta, child.signature
    )
    .unwrap();

    // The segment between the split and the turning point, where beta
    // falls as I0 grows. The turning point itself is degenerate.
    let turn = runs
        .curve
        .points
        .iter()
        .enumerate()
        .filter(|(_, cp)| cp.i0 <= saddle.information + 1e-9)
        .min_by(|a, b| a.1.beta.total_cmp(&b.1.beta))
        .map_or(0, |(i, _)| i);
    let mut subcritical = 0;
    let mut constrained_only = 0;
    for cp in &runs.curve.points[..turn] {
        subcritical += 1;
        let cl =
            classify_stationary_point(ID, &runs.joint, &cp.to_stationary_point(), DEFAULT_TOL_EIG)
                .expect("classification");
        if cl.verdict() == Verdict::ConstrainedOnly {
            constrained_only += 1;
        }
    }
    write!(
        detail,
        ", {constrained_only}/{subcritical} subcritical points constrained-only, {:.0} s < 600 s",
        runs.curve_secs
    )
    .unwrap();
    outcome(
        report.max_rel_err < 1e-2
            && !report.sign_changes.is_empty()
            && saddle.beta < pitchfork.beta
            && subcritical > 0
            && constrained_only == subcritical
            && runs.curve_secs < 600.0,
        detail,
    )
}

fn classification_consistency(runs: &Runs) -> Outcome {
    let schedule = AnnealSchedule {
        beta_max: 3.0,
        ..AnnealSchedule::default()
    };
    let mut records = theorem1_suite(ID, &runs.joint, 4, &schedule).expect("suite runs");
    records.extend(theorem1_suite(IB, &runs.two_clusters, 2, &schedule).expect("suite runs"));
    let violations: f64 = records
        .iter()
        .filter(|r| r.name.starts_with("lagrangian"))
        .map(|r| r.value)
        .sum();
    let perm = records
        .iter()
        .filter(|r| r.name.starts_with("permutation"))
        .map(|r| r.value)
        .fold(0.0, f64::max);
    outcome(
        records.iter().all(|r| r.passed),
        format!("{violations} violations, permutation change {perm:.1e} < 1e-10"),
    )
}

fn multiplier_slope(runs: &Runs) -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for b in &runs.anneal_id.branches {
        for s in lambda_slopes(b) {
            n += 1;
            worst = worst.max(s.rel_err);
        }
    }
    outcome(
        worst < 1e-3 && n > 0,
        format!("{n} interior points, dLambda/dbeta vs -I rel err {worst:.1e} < 1e-3"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |tag: &str| -> Vec<Vec<u8>> {
        let a = dir.path().join(format!("anneal-{tag}"));
        let c = dir.path().join(format!("curve-{tag}"));
        let bin = env!("CARGO_BIN_EXE_infodist");
        let st = Command::new(bin)
            .args(["anneal", "--seed", "5", "--beta-max", "2.5", "--out"])
            .arg(&a)
            .output()
            .expect("anneal runs");
        assert!(st.status.success());
        let st = Command::new(bin)
            .args([
                "curve", "--seed", "5", "--i0-max", "0.01", "--points", "10", "--out",
            ])
            .arg(&c)
            .output()
            .expect("curve runs");
        assert!(st.status.success());
        vec![
            std::fs::read(a.join("branches.csv")).expect("branches"),
            std::fs::read(c.join("curve.csv")).expect("curve"),
        ]
    };
    let first = run("1");
    let second = run("2");
    let bytes: usize = first.iter().map(Vec::len).sum();
    outcome(
        first == second,
        format!(
            "anneal and curve outputs, {bytes} bytes, identical: {}",
            first == second
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() -> ExitCode {
    let joint = gen_four_gaussian(&GaussianMixtureSpec::default()).expect("default mixture");
    let two_clusters =
        gen_four_gaussian(&GaussianMixtureSpec::diagonal(2, 0.1, (16, 16))).expect("mixture");

    let fine_anneal = AnnealSchedule {
        beta_max: 3.0,
        step: 0.002,
        step_min: 1e-5,
        ..AnnealSchedule::default()
    };
    let anneal_id = anneal(ID, &joint, 4, &fine_anneal).expect("anneal");
    let anneal_ib = anneal(
        IB,
        &two_clusters,
        2,
        &AnnealSchedule {
            beta_max: 3.0,
            ..AnnealSchedule::default()
        },
    )
    .expect("anneal");
    let (curve, elapsed) = timed(|| build_curve(&curve_spec(100), &joint).expect("curve"));
    let curve_fine = build_curve(&curve_spec(199), &joint).expect("curve");

    let mut runs = Runs {
        joint,
        two_clusters,
        anneal_id,
        anneal_ib,
        curve,
        curve_fine,
        curve_secs: elapsed.as_secs_f64(),
        grid_points: Vec::new(),
    };

    let results = [
        ("1 Euler identities", euler()),
        ("2 gradients and Hessians", gradients()),
        ("5 grid-search oracle", grid_oracle(&mut runs)),
        ("3 KKT fidelity", kkt_fidelity(&runs)),
        ("4 active constraint", active_constraint(&runs)),
        ("6 monotone and refinable", monotone_and_refinable(&runs)),
        (
            "7 dR/dI0 = -beta and subcritical branch",
            derivative_and_subcritical(&runs),
        ),
        (
            "8 classification consistency",
            classification_consistency(&runs),
        ),
        ("9 dLambda/dbeta = -I", multiplier_slope(&runs)),
        ("10 determinism", determinism()),
    ];
    let mut failed = 0;
    let mut ordered: Vec<_> = results.iter().collect();
    ordered.sort_by_key(|(name, _)| name.split(' ').next().and_then(|n| n.parse::<u32>().ok()));
    for (name, o) in ordered {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{name}] {}", o.detail);
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
