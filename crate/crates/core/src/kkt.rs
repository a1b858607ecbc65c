//! Newton iteration on the KKT system of the annealed Lagrangian.
//!
//! Unknowns are `s = ln q` (class-major), the normalization multipliers
//! `lambda` and, when the information constraint is imposed, `beta`.
//! Working in log coordinates keeps every iterate strictly inside the
//! simplex. Stationarity rows are divided by `p_k` so that the entropy
//! block of the Jacobian is the identity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::prob::functionals::{
    grad_mi_ws, grad_objective_ws, hessian_lagrangian_ws, mi_ws, Workspace,
};
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer};

const PINV_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Constraint {
    /// Solve `grad G + beta grad I + lambda = 0` at the given `beta`.
    FixedBeta(f64),
    /// Additionally impose `I(X;Y_N) = I0`, with `beta` unknown.
    FixedInformation(f64),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 80,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct KktSolution {
    pub q: Quantizer,
    pub beta: f64,
    pub lambda: DVector<f64>,
}

/// Least-squares multipliers: `lambda_k = -mean_nu (grad G + beta grad I)_{nu k}`.
pub(crate) fn multipliers_ls(
    grad_g: &DMatrix<f64>,
    grad_i: &DMatrix<f64>,
    beta: f64,
) -> DVector<f64> {
    let n = grad_g.nrows() as f64;
    DVector::from_iterator(
        grad_g.ncols(),
        (0..grad_g.ncols()).map(|k| {
            -(0..grad_g.nrows())
                .map(|nu| grad_g[(nu, k)] + beta * grad_i[(nu, k)])
                .sum::<f64>()
                / n
        }),
    )
}

/// Best-fit `beta` for a point that is not yet stationary.
///
/// Column means are removed (they are absorbed by `lambda`) and the
/// remaining parts of `grad G / p_k` and `grad I / p_k` are regressed.
pub(crate) fn fit_beta(
    grad_g: &DMatrix<f64>,
    grad_i: &DMatrix<f64>,
    p_y: &DVector<f64>,
) -> Option<f64> {
    let (n, k) = grad_g.shape();
    let mut num = 0.0;
    let mut den = 0.0;
    for col in 0..k {
        let mg = (0..n).map(|nu| grad_g[(nu, col)]).sum::<f64>() / n as f64;
        let mi = (0..n).map(|nu| grad_i[(nu, col)]).sum::<f64>() / n as f64;
        for nu in 0..n {
            let g = (grad_g[(nu, col)] - mg) / p_y[col];
            let i = (grad_i[(nu, col)] - mi) / p_y[col];
            num += g * i;
            den += i * i;
        }
    }
    (den > 1e-24).then(|| -num / den)
}

struct State {
    s: DMatrix<f64>,
    lambda: DVector<f64>,
    beta: f64,
}

impl State {
    fn quantizer(&self) -> Quantizer {
        Quantizer::from_normalized_unchecked(self.s.map(f64::exp))
    }
}

fn residual(
    kind: ObjectiveKind,
    p: &JointDistribution,
    state: &State,
    constraint: Constraint,
) -> DVector<f64> {
    let q = state.quantizer();
    let ws = Workspace::new(p, &q);
    let (n, k) = q.matrix().shape();
    let gg = grad_objective_ws(kind, p, &q, &ws);
    let gi = grad_mi_ws(p, &ws);
    let py = p.p_y();
    let extra = matches!(constraint, Constraint::FixedInformation(_)) as usize;
    let mut r = DVector::zeros(n * k + k + extra);
    for nu in 0..n {
        for col in 0..k {
            r[nu * k + col] =
                (gg[(nu, col)] + state.beta * gi[(nu, col)] + state.lambda[col]) / py[col];
        }
    }
    for col in 0..k {
        r[n * k + col] = q.matrix().column(col).sum() - 1.0;
    }
    if let Constraint::FixedInformation(i0) = constraint {
        r[n * k + k] = mi_ws(p, &ws) - i0;
    }
    r
}

fn jacobian(
    kind: ObjectiveKind,
    p: &JointDistribution,
    state: &State,
    constraint: Constraint,
) -> DMatrix<f64> {
    let q = state.quantizer();
    let ws = Workspace::new(p, &q);
    let (n, k) = q.matrix().shape();
    let dim = n * k;
    let hf = hessian_lagrangian_ws(kind, p, &q, state.beta, &ws);
    let gi = grad_mi_ws(p, &ws);
    let py = p.p_y();
    let qf = q.flatten();
    let extra = matches!(constraint, Constraint::FixedInformation(_)) as usize;
    let size = dim + k + extra;
    let mut j = DMatrix::zeros(size, size);
    for row in 0..dim {
        let col_k = row % k;
        let inv_p = 1.0 / py[col_k];
        for c in 0..dim {
            j[(row, c)] = hf[(row, c)] * qf[c] * inv_p;
        }
        j[(row, dim + col_k)] = inv_p;
        if extra == 1 {
            j[(row, dim + k)] = gi[(row / k, col_k)] * inv_p;
        }
    }
    for c in 0..dim {
        j[(dim + c % k, c)] = qf[c];
        if extra == 1 {
            j[(dim + k, c)] = gi[(c / k, c % k)] * qf[c];
        }
    }
    j
}

/// Runs damped Newton from `q0`. `beta0` is the fixed `beta` or the
/// starting guess when the information constraint is active.
pub(crate) fn solve_kkt(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q0: &Quantizer,
    beta0: f64,
    lambda0: Option<&DVector<f64>>,
    constraint: Constraint,
    opts: &NewtonOptions,
) -> Result<KktSolution> {
    let beta = match constraint {
        Constraint::FixedBeta(b) => b,
        Constraint::FixedInformation(_) => beta0,
    };
    let lambda = match lambda0 {
        Some(l) => l.clone(),
        None => {
            let ws = Workspace::new(p, q0);
            multipliers_ls(
                &grad_objective_ws(kind, p, q0, &ws),
                &grad_mi_ws(p, &ws),
                beta,
            )
        }
    };
    let mut state = State {
        s: q0.matrix().map(|v| v.max(1e-300).ln()),
        lambda,
        beta,
    };
    let mut r = residual(kind, p, &state, constraint);
    let mut norm = r.norm();

    for _ in 0..opts.max_iter {
        if !norm.is_finite() {
            break;
        }
        if r.amax() < opts.tol {
            return Ok(finish(state));
        }
        let j = jacobian(kind, p, &state, constraint);
        let lu_step = j.clone().lu().solve(&(-&r));
        let mut accepted =
            lu_step.and_then(|step| line_search(kind, p, &state, &step, norm, constraint, opts));
        if accepted.as_ref().is_none_or(|a| a.3 < 0.25) {
            // Heavy damping signals a near-singular direction, such as a flat
            // manifold of solutions; try the minimum-norm step as well.
            let svd = j.svd(true, true);
            let cut = svd.singular_values.max() * PINV_RCOND;
            if let Ok(step) = svd.solve(&(-&r), cut) {
                if let Some(alt) = line_search(kind, p, &state, &step, norm, constraint, opts) {
                    if accepted.as_ref().is_none_or(|a| alt.2 < a.2) {
                        accepted = Some(alt);
                    }
                }
            }
        }
        match accepted {
            Some((trial, tr, tn, _)) => {
                state = trial;
                r = tr;
                norm = tn;
            }
            None => break,
        }
    }
    if r.amax() < opts.tol {
        return Ok(finish(state));
    }
    Err(Error::NonConvergence { residual: r.amax() })
}

fn line_search(
    kind: ObjectiveKind,
    p: &JointDistribution,
    state: &State,
    step: &DVector<f64>,
    norm: f64,
    constraint: Constraint,
    opts: &NewtonOptions,
) -> Option<(State, DVector<f64>, f64, f64)> {
    if step.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let (n, k) = state.s.shape();
    let mut t = 1.0;
    for _ in 0..=opts.max_halvings {
        let trial = advance(state, step, t, n, k, constraint);
        let tr = residual(kind, p, &trial, constraint);
        let tn = tr.norm();
        if tn.is_finite() && tn < (1.0 - 1e-4 * t) * norm {
            return Some((trial, tr, tn, t));
        }
        t *= 0.5;
    }
    None
}

fn advance(
    state: &State,
    step: &DVector<f64>,
    t: f64,
    n: usize,
    k: usize,
    constraint: Constraint,
) -> State {
    let dim = n * k;
    let s = DMatrix::from_fn(n, k, |nu, col| state.s[(nu, col)] + t * step[nu * k + col]);
    let lambda = DVector::from_fn(k, |col, _| state.lambda[col] + t * step[dim + col]);
    let beta = match constraint {
        Constraint::FixedBeta(b) => b,
        Constraint::FixedInformation(_) => state.beta + t * step[dim + k],
    };
    State { s, lambda, beta }
}

fn finish(state: State) -> KktSolution {
    let mut q = state.s.map(f64::exp);
    for mut col in q.column_iter_mut() {
        let sum = col.sum();
        col /= sum;
    }
    KktSolution {
        q: Quantizer::from_normalized_unchecked(q),
        beta: state.beta,
        lambda: state.lambda,
    }
}
