//! Property suites run by the `verify` command.
//!
//! Each suite returns one [`CheckRecord`] per property with the worst value
//! observed and the threshold it is held to.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anneal::{anneal, AnnealSchedule};
use crate::curve::{build_curve, verify_theorem3, CurveSpec, SolverOptions};
use crate::dataset::CheckRecord;
use crate::error::Result;
use crate::prob::{
    compression_information, conditional_entropy, grad_compression_information,
    grad_conditional_entropy, grad_mutual_information, grad_objective, hessian_lagrangian,
    mutual_information, JointDistribution, ObjectiveKind, Quantizer,
};
use crate::spectral::{classify_quantizer, DEFAULT_TOL_EIG};

pub const EULER_TOL: f64 = 1e-10;
pub const GRADIENT_REL_TOL: f64 = 1e-6;
pub const HESSIAN_ABS_TOL: f64 = 1e-5;
pub const PERMUTATION_TOL: f64 = 1e-10;
pub const THEOREM3_TOL: f64 = 1e-2;

const KINDS: [ObjectiveKind; 2] = [
    ObjectiveKind::InformationDistortion,
    ObjectiveKind::InformationBottleneck,
];

fn record(suite: &str, name: &str, value: f64, threshold: f64) -> CheckRecord {
    CheckRecord {
        suite: suite.into(),
        name: name.into(),
        value,
        threshold: Some(threshold),
        passed: value < threshold,
    }
}

/// Random joint of size `kx x k` and interior quantizer with `n` classes;
/// every entry is drawn from `[0.05, 1)` before normalizing.
pub fn random_instance(
    rng: &mut impl Rng,
    kx: usize,
    k: usize,
    n: usize,
) -> (JointDistribution, Quantizer) {
    let p = DMatrix::from_fn(kx, k, |_, _| rng.random_range(0.05..1.0));
    let q = DMatrix::from_fn(n, k, |_, _| rng.random_range(0.05..1.0));
    (
        JointDistribution::from_unnormalized(p).expect("positive entries"),
        Quantizer::normalized(q).expect("positive entries"),
    )
}

fn random_sizes(rng: &mut impl Rng) -> (usize, usize, usize) {
    (
        rng.random_range(2..=10),
        rng.random_range(2..=10),
        rng.random_range(2..=5),
    )
}

/// Random direction with zero column sums, unit Frobenius norm.
fn tangent(rng: &mut impl Rng, n: usize, k: usize) -> DMatrix<f64> {
    let mut v = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    for mut col in v.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let norm = v.norm();
    v / norm
}

fn shifted(q: &Quantizer, v: &DMatrix<f64>, h: f64) -> Quantizer {
    Quantizer::new(q.matrix() + v * h).expect("stays in the simplex")
}

/// `q . grad I = I`, `q . grad(-I(Y;Y_N)) = -I(Y;Y_N)` and
/// `q . grad H = H - 1` on random instances.
pub fn euler_suite(seed: u64, instances: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ei, mut eb, mut eh) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..instances {
        let (kx, k, n) = random_sizes(&mut rng);
        let (p, q) = random_instance(&mut rng, kx, k, n);
        let dot = |g: DMatrix<f64>| g.dot(q.matrix());
        ei = ei.max((dot(grad_mutual_information(&p, &q)?) - mutual_information(&p, &q)?).abs());
        eb = eb.max(
            (dot(-grad_compression_information(&p, &q)?) + compression_information(&p, &q)?).abs(),
        );
        eh = eh.max(
            (dot(grad_conditional_entropy(&p, &q)?) - (conditional_entropy(&p, &q)? - 1.0)).abs(),
        );
    }
    Ok(vec![
        record("euler", "q.gradI - I", ei, EULER_TOL),
        record("euler", "q.grad(-I(Y;YN)) + I(Y;YN)", eb, EULER_TOL),
        record("euler", "q.gradH - (H - 1)", eh, EULER_TOL),
    ])
}

/// Analytic gradients against central differences along random tangent
/// directions, and Hessians against central differences of the gradient.
pub fn gradient_suite(seed: u64, instances: usize) -> Result<Vec<CheckRecord>> {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gi, mut gg, mut hh) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..instances {
        let kind = KINDS[i % 2];
        let (kx, k, n) = random_sizes(&mut rng);
        let (p, q) = random_instance(&mut rng, kx, k, n);
        let beta = rng.random_range(0.0..5.0);
        let v = tangent(&mut rng, n, k);
        let (qp, qm) = (shifted(&q, &v, H), shifted(&q, &v, -H));

        // Relative to the size of the projected gradient.
        let rel = |fd: f64, g: DMatrix<f64>| -> f64 {
            let mut proj = g.clone();
            for mut col in proj.column_iter_mut() {
                let m = col.mean();
                col.add_scalar_mut(-m);
            }
            (fd - g.dot(&v)).abs() / proj.norm().max(1e-12)
        };
        let fd_i = (mutual_information(&p, &qp)? - mutual_information(&p, &qm)?) / (2.0 * H);
        gi = gi.max(rel(fd_i, grad_mutual_information(&p, &q)?));
        let g = |q: &Quantizer| crate::prob::objective_value(kind, &p, q);
        let fd_g = (g(&qp)? - g(&qm)?) / (2.0 * H);
        gg = gg.max(rel(fd_g, grad_objective(kind, &p, &q)?));

        let grad_l = |q: &Quantizer| -> Result<DMatrix<f64>> {
            Ok(grad_objective(kind, &p, q)? + grad_mutual_information(&p, q)? * beta)
        };
        let fd = (grad_l(&qp)? - grad_l(&qm)?) / (2.0 * H);
        let hv = hessian_lagrangian(kind, &p, &q, beta)? * nalgebra::DVector::from_vec(q_flat(&v));
        let fd_flat = q_flat(&fd);
        let err = hv
            .iter()
            .zip(&fd_flat)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        hh = hh.max(err);
    }
    Ok(vec![
        record("gradients", "grad I relative error", gi, GRADIENT_REL_TOL),
        record("gradients", "grad G relative error", gg, GRADIENT_REL_TOL),
        record("gradients", "Hessian absolute error", hh, HESSIAN_ABS_TOL),
    ])
}

/// Class-major flattening of an `N x K` matrix.
fn q_flat(m: &DMatrix<f64>) -> Vec<f64> {
    let (n, k) = m.shape();
    (0..n * k).map(|i| m[(i / k, i % k)]).collect()
}

/// Anneals `p` and checks, at every point, that passing the Lagrangian
/// kernel test implies passing the constrained one and that both spectra
/// are unchanged by relabeling the classes.
pub fn theorem1_suite(
    kind: ObjectiveKind,
    p: &JointDistribution,
    classes: usize,
    schedule: &AnnealSchedule,
) -> Result<Vec<CheckRecord>> {
    let outcome = anneal(kind, p, classes, schedule)?;
    let mut violations = 0usize;
    let mut perm_err = 0.0f64;
    let mut flag_changes = 0usize;
    let mut checked = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.rng_seed);
    for (_, sp) in outcome.points() {
        let Some(c) = &sp.classification else {
            continue;
        };
        checked += 1;
        if c.solves_lagrangian && c.solves_constrained == Some(false) {
            violations += 1;
        }
        let mut perm: Vec<usize> = (0..classes).collect();
        for i in (1..classes).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let other = classify_quantizer(
            kind,
            p,
            &sp.q.permute_classes(&perm),
            sp.beta,
            DEFAULT_TOL_EIG,
        )?;
        let diff = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        perm_err = perm_err.max(diff(
            &c.lagrangian_eigenvalues,
            &other.lagrangian_eigenvalues,
        ));
        if let (Some(a), Some(b)) = (&c.constrained_eigenvalues, &other.constrained_eigenvalues) {
            perm_err = perm_err.max(diff(a, b));
        }
        if other.solves_lagrangian != c.solves_lagrangian
            || other.solves_constrained != c.solves_constrained
        {
            flag_changes += 1;
        }
    }
    let mut out = vec![
        record(
            "theorem1",
            "lagrangian without constrained",
            violations as f64,
            0.5,
        ),
        record(
            "theorem1",
            "permutation eigenvalue change",
            perm_err,
            PERMUTATION_TOL,
        ),
        record(
            "theorem1",
            "permutation verdict change",
            flag_changes as f64,
            0.5,
        ),
    ];
    if checked == 0 {
        out.push(record("theorem1", "classified points", 0.0, 0.0));
    }
    Ok(out)
}

/// Builds `R(I0)` and compares `dR/dI0` with `-beta`. The number of sign
/// changes of `dbeta/dI0` is reported but never fails.
pub fn theorem3_suite(spec: &CurveSpec, p: &JointDistribution) -> Result<Vec<CheckRecord>> {
    let curve = build_curve(spec, p)?;
    let report = verify_theorem3(&curve.points)?;
    let sign_changes = CheckRecord {
        suite: "theorem3".into(),
        name: "sign changes of dbeta/dI0".into(),
        value: report.sign_changes.len() as f64,
        threshold: None,
        passed: true,
    };
    Ok(vec![
        record(
            "theorem3",
            "|dR/dI0 + beta| / beta",
            report.max_rel_err,
            THEOREM3_TOL,
        ),
        sign_changes,
    ])
}

/// Curve settings for the theorem3 suite: `I0` from `0.001` in steps of
/// `0.001` up to a third of the reachable information, at most `0.06`.
pub fn theorem3_spec(
    kind: ObjectiveKind,
    p: &JointDistribution,
    classes: usize,
    seed: u64,
) -> CurveSpec {
    let top = crate::curve::max_information(p, classes, seed);
    let steps = ((top / 3.0).min(0.06) / 1e-3).floor().max(5.0) as usize;
    CurveSpec {
        kind,
        i0_min: 1e-3,
        i0_max: 1e-3 * steps as f64,
        points: steps,
        solver: SolverOptions {
            classes,
            seed,
            ..SolverOptions::default()
        },
        anneal: None,
        ..CurveSpec::default()
    }
}
