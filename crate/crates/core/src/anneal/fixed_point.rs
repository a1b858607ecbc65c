use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kkt::multipliers_ls;
use crate::prob::functionals::{grad_mi_ws, grad_objective_ws, Workspace};
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer, PROB_FLOOR};

/// Exponents `beta (grad I)_{nu k} / p_k`, plus `ln p(nu)` for the bottleneck.
fn exponents(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    ws: &Workspace,
) -> Result<DMatrix<f64>> {
    let gi = grad_mi_ws(p, ws);
    let py = p.p_y();
    let mut a = DMatrix::zeros(gi.nrows(), gi.ncols());
    for k in 0..gi.ncols() {
        for nu in 0..gi.nrows() {
            let g = gi[(nu, k)];
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient {
                    class: nu,
                    symbol: k,
                });
            }
            a[(nu, k)] = beta * g / py[k];
            if kind == ObjectiveKind::InformationBottleneck {
                a[(nu, k)] += ws.pn[nu].max(PROB_FLOOR).ln();
            }
        }
    }
    debug_assert_eq!(a.ncols(), q.symbols());
    Ok(a)
}

/// Column-wise `(max, ln sum exp(a - max))`.
fn column_log_partition(a: &DMatrix<f64>) -> Vec<(f64, f64)> {
    a.column_iter()
        .map(|c| {
            let m = c.max();
            (m, c.iter().map(|v| (v - m).exp()).sum::<f64>().ln())
        })
        .collect()
}

/// One self-consistent update of the quantizer at `beta`.
///
/// Information distortion: `q'_{nu k} = exp(beta (grad I)_{nu k}/p_k) / Z_k`.
/// Bottleneck: `q'_{nu k} = p(nu) exp(beta (grad I)_{nu k}/p_k) / Z_k`.
/// Each column is normalized by its own partition sum.
pub fn fixed_point_update(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
) -> Result<Quantizer> {
    check(p, q)?;
    let ws = Workspace::new(p, q);
    update_ws(kind, p, q, beta, &ws)
}

pub(crate) fn update_ws(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    ws: &Workspace,
) -> Result<Quantizer> {
    let mut a = exponents(kind, p, q, beta, ws)?;
    for mut col in a.column_iter_mut() {
        let m = col.max();
        col.apply(|v| *v = (*v - m).exp());
        let z = col.sum();
        col /= z;
    }
    Ok(Quantizer::from_normalized_unchecked(a))
}

/// Lagrange multipliers of the normalization constraints.
///
/// Information distortion uses the closed form
/// `lambda_k = p_k (1 - ln sum_nu exp(beta (grad I)_{nu k} / p_k))`,
/// evaluated with max-subtraction. The bottleneck uses the least-squares
/// solution of the stationarity equations, which is exact at stationary
/// points.
pub fn lagrange_multipliers(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
) -> Result<DVector<f64>> {
    check(p, q)?;
    let ws = Workspace::new(p, q);
    multipliers_ws(kind, p, q, beta, &ws)
}

pub(crate) fn multipliers_ws(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    ws: &Workspace,
) -> Result<DVector<f64>> {
    match kind {
        ObjectiveKind::InformationDistortion => {
            let a = exponents(kind, p, q, beta, ws)?;
            let py = p.p_y();
            Ok(DVector::from_iterator(
                a.ncols(),
                column_log_partition(&a)
                    .into_iter()
                    .enumerate()
                    .map(|(k, (m, lse))| py[k] * (1.0 - m - lse)),
            ))
        }
        ObjectiveKind::InformationBottleneck => Ok(multipliers_ls(
            &grad_objective_ws(kind, p, q, ws),
            &grad_mi_ws(p, ws),
            beta,
        )),
    }
}

/// Multipliers recovered from the stationarity equations alone
/// (least squares over each column), independent of the closed form.
pub fn stationarity_multipliers(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
) -> Result<DVector<f64>> {
    check(p, q)?;
    let ws = Workspace::new(p, q);
    Ok(multipliers_ls(
        &grad_objective_ws(kind, p, q, &ws),
        &grad_mi_ws(p, &ws),
        beta,
    ))
}

/// `|| grad G + beta grad I + lambda ||_inf`.
pub fn kkt_residual(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    lambda: &DVector<f64>,
) -> Result<f64> {
    check(p, q)?;
    if lambda.len() != q.symbols() {
        return Err(Error::DimensionMismatch(format!(
            "lambda has length {}, expected {}",
            lambda.len(),
            q.symbols()
        )));
    }
    let ws = Workspace::new(p, q);
    Ok(residual_ws(kind, p, q, beta, lambda, &ws))
}

pub(crate) fn residual_ws(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    lambda: &DVector<f64>,
    ws: &Workspace,
) -> f64 {
    let gg = grad_objective_ws(kind, p, q, ws);
    let gi = grad_mi_ws(p, ws);
    let mut worst: f64 = 0.0;
    for k in 0..gg.ncols() {
        for nu in 0..gg.nrows() {
            worst = worst.max((gg[(nu, k)] + beta * gi[(nu, k)] + lambda[k]).abs());
        }
    }
    worst
}

fn check(p: &JointDistribution, q: &Quantizer) -> Result<()> {
    if p.y_size() != q.symbols() {
        return Err(Error::DimensionMismatch(format!(
            "joint has K = {} symbols, quantizer has {}",
            p.y_size(),
            q.symbols()
        )));
    }
    Ok(())
}
