use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use infodist::anneal::{anneal, AnnealSchedule};
use infodist::checks;
use infodist::curve::{
    build_curve, curve_branches, max_information, verify_theorem3, CurveSpec, SolverOptions,
};
use infodist::dataset::{
    gen_four_gaussian, load_joint, save_joint, write_branches_csv, write_curve_csv, write_summary,
    CheckRecord, EventRecord, GaussianMixtureSpec, Summary, Unit,
};
use infodist::spectral::{detect_bifurcations, BifurcationKind, DEFAULT_TOL_EIG};
use infodist::{Error, JointDistribution, ObjectiveKind};

/// Annealing, bifurcation and relevance-compression experiments.
///
/// Options may also come from a `key = value` file given with `--config`;
/// flags on the command line take precedence.
#[derive(Parser)]
#[command(name = "infodist", version)]
struct Cli {
    /// `key = value` file of default flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Gaussian-mixture joint distribution to a CSV file.
    GenData(GenData),
    /// Anneal in beta and write branches and bifurcations.
    Anneal(AnnealArgs),
    /// Build R(I0) by fixed-information solves and check dR/dI0 = -beta.
    Curve(CurveArgs),
    /// Run property suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(args_override_self = true)]
struct Common {
    /// Joint distribution CSV; the default mixture is generated if omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "id")]
    objective: ObjectiveKind,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Unit of information values in outputs.
    #[arg(long, default_value = "nats")]
    unit: Unit,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct GenData {
    #[arg(long, default_value_t = 4)]
    components: usize,
    #[arg(long, num_args = 2, value_names = ["KX", "K"], default_values_t = [52, 52])]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Standard deviation of a seeded random shift of the means.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "nats")]
    unit: Unit,
    #[arg(long, default_value = "joint.csv")]
    out: PathBuf,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct AnnealArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.0)]
    beta_start: f64,
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.001)]
    i0_min: f64,
    #[arg(long, default_value_t = 0.1)]
    i0_max: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Random starts per I0.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Worker threads for the starts.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Largest beta of the seeding anneal; 0 disables it.
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Suite {
    All,
    Euler,
    Gradients,
    Theorem1,
    Theorem3,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Random instances for the euler suite; the gradients suite uses a tenth.
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    /// Write the results as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Error(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

/// Config entries become flags placed right after the subcommand name, so
/// that later command-line flags override them.
fn with_config(args: Vec<OsString>) -> Result<Vec<OsString>, Error> {
    let pos = args.iter().position(|a| a == "--config");
    let inline = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| s.starts_with("--config=")));
    let path: PathBuf = match (pos, inline) {
        (Some(i), _) => match args.get(i + 1) {
            Some(p) => p.into(),
            None => return Ok(args),
        },
        (None, Some(i)) => args[i].to_str().unwrap_or_default()["--config=".len()..].into(),
        (None, None) => return Ok(args),
    };
    let text = std::fs::read_to_string(&path)?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "{}:{}: expected key = value",
                path.display(),
                n + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            continue;
        }
        extra.push(OsString::from(format!("--{key}")));
        let value = value.trim();
        if value != "true" {
            extra.extend(value.split_whitespace().map(OsString::from));
        }
    }
    let names = ["gen-data", "anneal", "curve", "verify"];
    let Some(sub) = args.iter().position(|a| names.iter().any(|n| a == n)) else {
        return Ok(args);
    };
    let mut out = args[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

fn load(common: &Common) -> Result<JointDistribution, Error> {
    match &common.data {
        Some(path) => load_joint(path),
        None => gen_four_gaussian(&GaussianMixtureSpec::default()),
    }
}

fn summary(command: &str, common: &Common, p: &JointDistribution) -> Summary {
    Summary {
        command: command.into(),
        objective: Some(common.objective),
        classes: Some(common.classes),
        unit: common.unit,
        seed: Some(common.seed),
        mutual_information_xy: Some(common.unit.from_nats(p.mutual_information())),
        ..Summary::default()
    }
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn gen_data(a: &GenData) -> Result<(), Failure> {
    if a.components == 0 {
        return Err(Error::InvalidSpec("--components must be at least 1".into()).into());
    }
    let mut spec = GaussianMixtureSpec::diagonal(a.components, a.sigma, (a.grid[0], a.grid[1]));
    spec.jitter = a.jitter;
    spec.rng_seed = a.seed;
    let p = gen_four_gaussian(&spec)?;
    save_joint(&p, &a.out)?;
    println!(
        "wrote {} ({}x{}), I(X;Y) = {:.6} {}",
        a.out.display(),
        p.x_size(),
        p.y_size(),
        a.unit.from_nats(p.mutual_information()),
        a.unit
    );
    Ok(())
}

fn run_anneal(a: &AnnealArgs) -> Result<(), Failure> {
    let c = &a.common;
    let p = load(c)?;
    let schedule = AnnealSchedule {
        beta_start: a.beta_start,
        beta_max: a.beta_max,
        step: a.step,
        rng_seed: c.seed,
        ..AnnealSchedule::default()
    };
    let outcome = anneal(c.objective, &p, c.classes, &schedule)?;
    create_dir(&a.out)?;
    write_branches_csv(&outcome.branches, c.unit, a.out.join("branches.csv"))?;
    let mut s = summary("anneal", c, &p);
    s.bifurcations = outcome
        .events
        .iter()
        .map(|e| EventRecord::new(e, c.unit))
        .collect();
    write_summary(&s, a.out.join("anneal.json"))?;
    println!(
        "{} branches, {} points, {} bifurcations",
        outcome.branches.len(),
        outcome.points().count(),
        outcome.events.len()
    );
    for e in &s.bifurcations {
        println!("  {:?} at beta = {:.6}", e.kind, e.beta);
    }
    Ok(())
}

fn run_curve(a: &CurveArgs) -> Result<(), Failure> {
    let c = &a.common;
    let p = load(c)?;
    if a.i0_max >= p.mutual_information() {
        return Err(Error::InfeasibleI0 {
            i0: a.i0_max,
            max: p.mutual_information(),
        }
        .into());
    }
    let spec = CurveSpec {
        kind: c.objective,
        i0_min: a.i0_min,
        i0_max: a.i0_max,
        points: a.points,
        solver: SolverOptions {
            classes: c.classes,
            restarts: a.restarts,
            seed: c.seed,
            jobs: a.jobs,
            ..SolverOptions::default()
        },
        anneal: (a.beta_max > 0.0).then(|| AnnealSchedule {
            beta_max: a.beta_max,
            rng_seed: c.seed,
            ..AnnealSchedule::default()
        }),
        ..CurveSpec::default()
    };
    spec.validate()?;
    let curve = build_curve(&spec, &p)?;
    create_dir(&a.out)?;
    write_curve_csv(&curve.points, c.unit, a.out.join("curve.csv"))?;

    let mut s = summary("curve", c, &p);
    if let Some(o) = &curve.anneal {
        s.bifurcations
            .extend(o.events.iter().map(|e| EventRecord::new(e, c.unit)));
    }
    let first_id = curve.anneal.as_ref().map_or(0, |o| o.branches.len());
    for b in curve_branches(&curve.points, first_id) {
        for e in detect_bifurcations(c.objective, &p, &b, DEFAULT_TOL_EIG)? {
            if e.kind == BifurcationKind::SaddleNode {
                s.bifurcations.push(EventRecord::new(&e, c.unit));
            }
        }
    }
    s.bifurcations.sort_by(|x, y| x.beta.total_cmp(&y.beta));
    match verify_theorem3(&curve.points) {
        Ok(mut report) => {
            for v in &mut report.sign_changes {
                *v = c.unit.from_nats(*v);
            }
            println!(
                "max |dR/dI0 + beta| / beta = {:.3e}, {} sign change(s) of dbeta/dI0",
                report.max_rel_err,
                report.sign_changes.len()
            );
            s.theorem3 = Some(report);
        }
        Err(e) => println!("derivative check skipped: {e}"),
    }
    for g in &curve.gaps {
        println!("  no solution at I0 = {}: {}", g.i0, g.reason);
    }
    write_summary(&s, a.out.join("curve.json"))?;
    println!(
        "{} points, {} gaps, max achievable I ~ {:.6} {}",
        curve.points.len(),
        curve.gaps.len(),
        c.unit.from_nats(max_information(&p, c.classes, c.seed)),
        c.unit
    );
    Ok(())
}

fn run_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let c = &a.common;
    let mut records: Vec<CheckRecord> = Vec::new();
    let wants = |s: Suite| a.suite == Suite::All || a.suite == s;
    if wants(Suite::Euler) {
        records.extend(checks::euler_suite(c.seed, a.instances)?);
    }
    if wants(Suite::Gradients) {
        records.extend(checks::gradient_suite(c.seed, (a.instances / 10).max(1))?);
    }
    if wants(Suite::Theorem1) || wants(Suite::Theorem3) {
        let p = load(c)?;
        if wants(Suite::Theorem1) {
            let schedule = AnnealSchedule {
                beta_max: a.beta_max,
                rng_seed: c.seed,
                ..AnnealSchedule::default()
            };
            records.extend(checks::theorem1_suite(
                c.objective,
                &p,
                c.classes,
                &schedule,
            )?);
        }
        if wants(Suite::Theorem3) {
            let spec = checks::theorem3_spec(c.objective, &p, c.classes, c.seed);
            records.extend(checks::theorem3_suite(&spec, &p)?);
        }
    }

    println!(
        "{:<10} {:<36} {:>12} {:>10}  result",
        "suite", "check", "value", "limit"
    );
    for r in &records {
        println!(
            "{:<10} {:<36} {:>12.3e} {:>10}  {}",
            r.suite,
            r.name,
            r.value,
            r.threshold.map_or("-".into(), |t| format!("{t:.1e}")),
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    if let Some(path) = &a.report {
        let s = Summary {
            command: "verify".into(),
            objective: Some(c.objective),
            classes: Some(c.classes),
            seed: Some(c.seed),
            checks: records.clone(),
            ..Summary::default()
        };
        write_summary(&s, path)?;
    }
    if records.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let args = match with_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Anneal(a) => run_anneal(a),
        Command::Curve(a) => run_curve(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(4)
        }
    }
}
