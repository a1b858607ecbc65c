use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::anneal::{residual_ws, StationaryPoint};
use crate::error::{Error, Result};
use crate::kkt::{fit_beta, solve_kkt, Constraint, NewtonOptions};
use crate::prob::functionals::{grad_mi_ws, grad_objective_ws, mi_ws, objective_ws, Workspace};
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer};
use crate::spectral::critical_beta;

/// Exhaustive search over hard assignments is used below this many.
const MAX_ENUMERATION: usize = 1 << 12;

/// A maximizer of `G` on `{ I(X;Y_N) = I0 }`.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub i0: f64,
    /// `G(q)`: `H(Y_N|Y)` or `-I(Y;Y_N)`.
    pub r: f64,
    /// Multiplier of the information constraint.
    pub beta: f64,
    pub branch_id: usize,
    /// `|| grad G + beta grad I + lambda ||_inf`.
    pub kkt_residual: f64,
    /// `I(X;Y_N)` at `q`.
    pub information: f64,
    pub q: Quantizer,
    pub lambda: DVector<f64>,
}

impl CurvePoint {
    /// `Lambda = sum_k lambda_k`.
    pub fn lambda_sum(&self) -> f64 {
        self.lambda.sum()
    }

    pub fn to_stationary_point(&self) -> StationaryPoint {
        StationaryPoint {
            q: self.q.clone(),
            beta: self.beta,
            lambda: self.lambda.clone(),
            kkt_residual: self.kkt_residual,
            objective: self.r,
            information: self.information,
            classification: None,
        }
    }
}

/// Settings of [`solve_constrained`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub classes: usize,
    /// Random starting directions tried at every `I0`.
    pub restarts: usize,
    pub seed: u64,
    /// Newton stops when every scaled KKT residual is below this.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Required `|I(X;Y_N) - I0|` of an accepted solution.
    pub tol_active: f64,
    /// Worker threads for independent starts.
    pub jobs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            classes: 2,
            restarts: 8,
            seed: 0,
            newton_tol: 1e-11,
            max_newton_iters: 100,
            tol_active: 1e-8,
            jobs: 1,
        }
    }
}

impl SolverOptions {
    fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.newton_tol,
            max_iter: self.max_newton_iters,
            ..NewtonOptions::default()
        }
    }
}

/// A starting point for the fixed-information Newton solve.
#[derive(Debug, Clone)]
pub enum Seed {
    /// A nearby solution, used as is.
    Warm {
        q: Quantizer,
        beta: f64,
        lambda: Option<DVector<f64>>,
    },
    /// Class logits `Z`; the start is `softmax(t Z)` with `t` chosen so that
    /// `I(X;Y_N) = I0`.
    Direction(DMatrix<f64>),
}

impl From<&CurvePoint> for Seed {
    fn from(cp: &CurvePoint) -> Self {
        Seed::Warm {
            q: cp.q.clone(),
            beta: cp.beta,
            lambda: Some(cp.lambda.clone()),
        }
    }
}

impl From<&StationaryPoint> for Seed {
    fn from(sp: &StationaryPoint) -> Self {
        Seed::Warm {
            q: sp.q.clone(),
            beta: sp.beta,
            lambda: Some(sp.lambda.clone()),
        }
    }
}

fn softmax_columns(z: &DMatrix<f64>, t: f64) -> Quantizer {
    let mut q = z * t;
    for mut col in q.column_iter_mut() {
        let m = col.max();
        col.apply(|v| *v = (*v - m).exp());
        let s = col.sum();
        col /= s;
    }
    Quantizer::from_normalized_unchecked(q)
}

fn information(p: &JointDistribution, q: &Quantizer) -> f64 {
    mi_ws(p, &Workspace::new(p, q))
}

/// Scales `z` so that `softmax(t z)` carries information `i0`.
fn scale_to_information(p: &JointDistribution, z: &DMatrix<f64>, i0: f64) -> Option<Quantizer> {
    let mut hi = 1.0;
    while information(p, &softmax_columns(z, hi)) < i0 {
        hi *= 2.0;
        if hi > 1e4 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if information(p, &softmax_columns(z, mid)) < i0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(softmax_columns(z, 0.5 * (lo + hi)))
}

/// Logit directions `u (x) w` along which the uniform quantizer first
/// loses stability, for every split of the classes into a leading block
/// and the rest, in both orientations.
pub fn critical_seeds(p: &JointDistribution, classes: usize) -> Vec<Seed> {
    let Some(cp) = critical_beta(p) else {
        return Vec::new();
    };
    let mut seeds = Vec::new();
    for m in 1..classes {
        let share = m as f64 / classes as f64;
        for sign in [1.0, -1.0] {
            let z = DMatrix::from_fn(classes, p.y_size(), |nu, k| {
                let u = if nu < m { 1.0 } else { 0.0 } - share;
                sign * u * cp.direction[k]
            });
            seeds.push(Seed::Direction(z));
        }
    }
    seeds
}

/// Random class scores that are linear in the conditionals `p(x|y_k)`,
/// so that symbols with similar conditionals start in similar classes.
pub fn random_seeds(p: &JointDistribution, classes: usize, count: usize, seed: u64) -> Vec<Seed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let py = p.p_y();
    let cond = DMatrix::from_fn(p.x_size(), p.y_size(), |x, k| p.matrix()[(x, k)] / py[k]);
    (0..count)
        .map(|_| {
            let a = DMatrix::from_fn(classes, p.x_size(), |_, _| {
                rng.sample::<f64, _>(StandardNormal)
            });
            Seed::Direction(a * &cond)
        })
        .collect()
}

struct Candidate {
    q: Quantizer,
    beta: f64,
    lambda: DVector<f64>,
    r: f64,
    information: f64,
    kkt_residual: f64,
}

fn run_seed(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    seed: &Seed,
    opts: &SolverOptions,
) -> std::result::Result<Candidate, f64> {
    let (q0, beta0, lambda0) = match seed {
        Seed::Warm { q, beta, lambda } => (q.clone(), *beta, lambda.clone()),
        Seed::Direction(z) => {
            let q = scale_to_information(p, z, i0).ok_or(f64::INFINITY)?;
            let ws = Workspace::new(p, &q);
            let beta = fit_beta(
                &grad_objective_ws(kind, p, &q, &ws),
                &grad_mi_ws(p, &ws),
                p.p_y(),
            )
            .filter(|b| b.is_finite() && *b > 0.0)
            .or_else(|| critical_beta(p).map(|c| c.beta))
            .unwrap_or(1.0);
            (q, beta, None)
        }
    };
    let sol = solve_kkt(
        kind,
        p,
        &q0,
        beta0,
        lambda0.as_ref(),
        Constraint::FixedInformation(i0),
        &opts.newton(),
    )
    .map_err(|e| match e {
        Error::NonConvergence { residual } => residual,
        _ => f64::INFINITY,
    })?;
    let ws = Workspace::new(p, &sol.q);
    let information = mi_ws(p, &ws);
    if (information - i0).abs() >= opts.tol_active || sol.beta < 0.0 || !sol.beta.is_finite() {
        return Err(f64::INFINITY);
    }
    Ok(Candidate {
        r: objective_ws(kind, p, &sol.q, &ws),
        kkt_residual: residual_ws(kind, p, &sol.q, sol.beta, &sol.lambda, &ws),
        information,
        beta: sol.beta,
        lambda: sol.lambda,
        q: sol.q,
    })
}

fn run_all(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    seeds: &[Seed],
    opts: &SolverOptions,
) -> Vec<std::result::Result<Candidate, f64>> {
    let jobs = opts.jobs.max(1).min(seeds.len().max(1));
    if jobs == 1 {
        return seeds
            .iter()
            .map(|s| run_seed(kind, p, i0, s, opts))
            .collect();
    }
    let chunk = seeds.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|s| run_seed(kind, p, i0, s, opts))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

/// Largest `I(X;Y_N)` reachable with `classes` classes.
///
/// `I(X;Y_N)` is convex in `q`, so its maximum over the simplex product is
/// attained at a hard assignment. These are enumerated when there are few
/// of them; otherwise the value is a lower bound from seeded hard-clustering
/// restarts that move each symbol to the class whose conditional `p(x|nu)`
/// best explains `p(x|y)`.
pub fn max_information(p: &JointDistribution, classes: usize, seed: u64) -> f64 {
    let k = p.y_size();
    if classes >= k {
        return p.mutual_information();
    }
    if classes <= 1 {
        return 0.0;
    }
    let total = (classes as f64).powi(k as i32);
    let hard_info = |assign: &[usize]| -> f64 {
        Quantizer::deterministic(classes, assign)
            .map(|q| information(p, &q))
            .unwrap_or(0.0)
    };
    if total <= MAX_ENUMERATION as f64 {
        let mut assign = vec![0usize; k];
        let mut best = 0.0f64;
        loop {
            best = best.max(hard_info(&assign));
            let mut pos = 0;
            loop {
                if pos == k {
                    return best;
                }
                assign[pos] += 1;
                if assign[pos] < classes {
                    break;
                }
                assign[pos] = 0;
                pos += 1;
            }
        }
    }

    let m = p.matrix();
    let py = p.p_y();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..16 {
        let mut assign: Vec<usize> = (0..k).map(|_| rng.random_range(0..classes)).collect();
        for _ in 0..200 {
            let mut pxn = DMatrix::<f64>::zeros(p.x_size(), classes);
            for (col, &nu) in assign.iter().enumerate() {
                for x in 0..p.x_size() {
                    pxn[(x, nu)] += m[(x, col)];
                }
            }
            let logs = DMatrix::from_fn(p.x_size(), classes, |x, nu| {
                let mass = pxn.column(nu).sum();
                if mass > 0.0 {
                    (pxn[(x, nu)] / mass).max(1e-300).ln()
                } else {
                    f64::NEG_INFINITY
                }
            });
            let next: Vec<usize> = (0..k)
                .map(|col| {
                    let score = |nu: usize| -> f64 {
                        (0..p.x_size())
                            .map(|x| m[(x, col)] / py[col] * logs[(x, nu)])
                            .sum()
                    };
                    (0..classes)
                        .max_by(|&a, &b| score(a).total_cmp(&score(b)))
                        .unwrap_or(0)
                })
                .collect();
            if next == assign {
                break;
            }
            assign = next;
        }
        best = best.max(hard_info(&assign));
    }
    best
}

/// Maximizes `G(q)` subject to `I(X;Y_N) = I0` by Newton on the KKT system
/// from every seed in `extra`, the warm start, the critical directions of
/// the uniform quantizer and `opts.restarts` random directions. Returns the
/// converged candidate with the largest `G`.
pub fn solve_constrained(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    warm_start: Option<&Quantizer>,
    opts: &SolverOptions,
) -> Result<CurvePoint> {
    let mut seeds = Vec::new();
    if let Some(q) = warm_start {
        let beta = critical_beta(p).map_or(1.0, |c| c.beta);
        seeds.push(Seed::Warm {
            q: q.clone(),
            beta,
            lambda: None,
        });
    }
    solve_constrained_seeded(kind, p, i0, seeds, opts)
}

/// [`solve_constrained`] with explicit leading seeds.
pub fn solve_constrained_seeded(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    mut seeds: Vec<Seed>,
    opts: &SolverOptions,
) -> Result<CurvePoint> {
    if opts.classes == 0 {
        return Err(Error::InvalidSpec("need at least one class".into()));
    }
    if !(i0 > 0.0 && i0.is_finite()) {
        return Err(Error::InvalidSpec(format!("I0 = {i0} must be positive")));
    }
    for s in &seeds {
        if let Seed::Warm { q, .. } = s {
            if q.symbols() != p.y_size() || q.classes() != opts.classes {
                return Err(Error::DimensionMismatch(format!(
                    "warm start is {}x{}, expected {}x{}",
                    q.classes(),
                    q.symbols(),
                    opts.classes,
                    p.y_size()
                )));
            }
        }
    }
    let upper = p.mutual_information();
    if i0 >= upper || opts.classes == 1 {
        return Err(Error::InfeasibleI0 {
            i0,
            max: if opts.classes == 1 { 0.0 } else { upper },
        });
    }
    let small = (opts.classes as f64).powi(p.y_size() as i32) <= MAX_ENUMERATION as f64;
    if small || opts.classes >= p.y_size() {
        let max = max_information(p, opts.classes, opts.seed);
        if i0 >= max {
            return Err(Error::InfeasibleI0 { i0, max });
        }
    }

    seeds.extend(critical_seeds(p, opts.classes));
    let point_seed = opts.seed ^ i0.to_bits().rotate_left(17);
    seeds.extend(random_seeds(p, opts.classes, opts.restarts, point_seed));

    match best_candidate(kind, p, i0, &seeds, opts) {
        Ok(cp) => Ok(cp),
        Err(smallest_residual) => {
            let max = max_information(p, opts.classes, opts.seed);
            if i0 >= max {
                Err(Error::InfeasibleI0 { i0, max })
            } else {
                Err(Error::NonConvergence {
                    residual: smallest_residual,
                })
            }
        }
    }
}

/// Runs exactly the given seeds and returns the best converged point.
pub fn solve_from_seeds(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    seeds: &[Seed],
    opts: &SolverOptions,
) -> Option<CurvePoint> {
    best_candidate(kind, p, i0, seeds, opts).ok()
}

fn best_candidate(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    seeds: &[Seed],
    opts: &SolverOptions,
) -> std::result::Result<CurvePoint, f64> {
    let mut best: Option<Candidate> = None;
    let mut smallest_residual = f64::INFINITY;
    for outcome in run_all(kind, p, i0, seeds, opts) {
        match outcome {
            Ok(c) => {
                if best.as_ref().is_none_or(|b| c.r > b.r + 1e-12) {
                    best = Some(c);
                }
            }
            Err(res) => smallest_residual = smallest_residual.min(res),
        }
    }
    best.map(|c| CurvePoint {
        i0,
        r: c.r,
        beta: c.beta,
        branch_id: 0,
        kkt_residual: c.kkt_residual,
        information: c.information,
        q: c.q,
        lambda: c.lambda,
    })
    .ok_or(smallest_residual)
}
