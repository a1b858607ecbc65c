use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{JointDistribution, Quantizer};
use crate::error::{Error, Result};

/// Probabilities are clamped to this value inside logarithms and divisions.
pub const PROB_FLOOR: f64 = 1e-15;

#[inline]
fn ln_floor(v: f64) -> f64 {
    v.max(PROB_FLOOR).ln()
}

/// Which relevance-compression objective `G(q)` is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// `G(q) = H(Y_N | Y)`.
    InformationDistortion,
    /// `G(q) = -I(Y; Y_N)`.
    InformationBottleneck,
}

impl ObjectiveKind {
    /// The constant `c` in `q . grad G = G + c` on the simplex.
    pub fn euler_offset(self) -> f64 {
        match self {
            ObjectiveKind::InformationDistortion => -1.0,
            ObjectiveKind::InformationBottleneck => 0.0,
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::InformationDistortion => "id",
            ObjectiveKind::InformationBottleneck => "ib",
        })
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "id" | "information-distortion" | "distortion" => {
                Ok(ObjectiveKind::InformationDistortion)
            }
            "ib" | "information-bottleneck" | "bottleneck" => {
                Ok(ObjectiveKind::InformationBottleneck)
            }
            other => Err(Error::InvalidSpec(format!("unknown objective '{other}'"))),
        }
    }
}

/// Induced joint `p(x, nu)` and class marginal `p(nu)` for one `(p, q)` pair.
pub(crate) struct Workspace {
    /// `K_X x N`.
    pub pxn: DMatrix<f64>,
    pub pn: DVector<f64>,
}

impl Workspace {
    pub fn new(p: &JointDistribution, q: &Quantizer) -> Self {
        let pxn = p.matrix() * q.matrix().transpose();
        let pn = q.matrix() * p.p_y();
        Self { pxn, pn }
    }
}

fn check_dims(p: &JointDistribution, q: &Quantizer) -> Result<()> {
    if p.y_size() != q.symbols() {
        return Err(Error::DimensionMismatch(format!(
            "joint has K = {} symbols, quantizer has {}",
            p.y_size(),
            q.symbols()
        )));
    }
    Ok(())
}

pub(crate) fn mi_ws(p: &JointDistribution, ws: &Workspace) -> f64 {
    let px = p.p_x();
    let mut total = 0.0;
    for nu in 0..ws.pn.len() {
        for x in 0..px.len() {
            let joint = ws.pxn[(x, nu)];
            if joint > 0.0 {
                total += joint * (joint / (px[x] * ws.pn[nu])).ln();
            }
        }
    }
    total
}

pub(crate) fn grad_mi_ws(p: &JointDistribution, ws: &Workspace) -> DMatrix<f64> {
    let px = p.p_x();
    let (kx, n) = ws.pxn.shape();
    let log_ratio = DMatrix::from_fn(kx, n, |x, nu| {
        if px[x] > 0.0 {
            ln_floor(ws.pxn[(x, nu)]) - px[x].ln() - ln_floor(ws.pn[nu])
        } else {
            0.0
        }
    });
    log_ratio.tr_mul(p.matrix())
}

pub(crate) fn entropy_ws(p: &JointDistribution, q: &Quantizer) -> f64 {
    let py = p.p_y();
    let mut total = 0.0;
    for (k, col) in q.matrix().column_iter().enumerate() {
        let h: f64 = col.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum();
        total -= py[k] * h;
    }
    total
}

pub(crate) fn grad_entropy_ws(p: &JointDistribution, q: &Quantizer) -> DMatrix<f64> {
    let py = p.p_y();
    let m = q.matrix();
    DMatrix::from_fn(m.nrows(), m.ncols(), |nu, k| {
        -py[k] * (ln_floor(m[(nu, k)]) + 1.0)
    })
}

pub(crate) fn compression_ws(p: &JointDistribution, q: &Quantizer, ws: &Workspace) -> f64 {
    let py = p.p_y();
    let m = q.matrix();
    let mut total = 0.0;
    for k in 0..m.ncols() {
        for nu in 0..m.nrows() {
            let v = m[(nu, k)];
            if v > 0.0 {
                total += py[k] * v * (v / ws.pn[nu]).ln();
            }
        }
    }
    total
}

pub(crate) fn grad_compression_ws(
    p: &JointDistribution,
    q: &Quantizer,
    ws: &Workspace,
) -> DMatrix<f64> {
    let py = p.p_y();
    let m = q.matrix();
    DMatrix::from_fn(m.nrows(), m.ncols(), |nu, k| {
        py[k] * (ln_floor(m[(nu, k)]) - ln_floor(ws.pn[nu]))
    })
}

pub(crate) fn objective_ws(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    ws: &Workspace,
) -> f64 {
    match kind {
        ObjectiveKind::InformationDistortion => entropy_ws(p, q),
        ObjectiveKind::InformationBottleneck => -compression_ws(p, q, ws),
    }
}

pub(crate) fn grad_objective_ws(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    ws: &Workspace,
) -> DMatrix<f64> {
    match kind {
        ObjectiveKind::InformationDistortion => grad_entropy_ws(p, q),
        ObjectiveKind::InformationBottleneck => -grad_compression_ws(p, q, ws),
    }
}

/// Adds `scale * d^2 I(X;Y_N)` into `out` (class-major, block diagonal).
fn add_hessian_mi(p: &JointDistribution, ws: &Workspace, scale: f64, out: &mut DMatrix<f64>) {
    let pm = p.matrix();
    let py = p.p_y();
    let (kx, k) = pm.shape();
    let n = ws.pn.len();
    for nu in 0..n {
        let inv = DVector::from_fn(kx, |x, _| 1.0 / ws.pxn[(x, nu)].max(PROB_FLOOR));
        let mut weighted = pm.clone();
        for (x, mut row) in weighted.row_iter_mut().enumerate() {
            row *= inv[x];
        }
        let block = pm.tr_mul(&weighted);
        let inv_pn = 1.0 / ws.pn[nu].max(PROB_FLOOR);
        let off = nu * k;
        for a in 0..k {
            for b in 0..k {
                out[(off + a, off + b)] += scale * (block[(a, b)] - py[a] * py[b] * inv_pn);
            }
        }
    }
}

fn add_hessian_objective(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    ws: &Workspace,
    out: &mut DMatrix<f64>,
) {
    let py = p.p_y();
    let m = q.matrix();
    let (n, k) = m.shape();
    for nu in 0..n {
        let off = nu * k;
        for a in 0..k {
            out[(off + a, off + a)] -= py[a] / m[(nu, a)].max(PROB_FLOOR);
        }
        if kind == ObjectiveKind::InformationBottleneck {
            let inv_pn = 1.0 / ws.pn[nu].max(PROB_FLOOR);
            for a in 0..k {
                for b in 0..k {
                    out[(off + a, off + b)] += py[a] * py[b] * inv_pn;
                }
            }
        }
    }
}

pub(crate) fn hessian_lagrangian_ws(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    ws: &Workspace,
) -> DMatrix<f64> {
    let dim = q.classes() * q.symbols();
    let mut h = DMatrix::zeros(dim, dim);
    add_hessian_objective(kind, p, q, ws, &mut h);
    if beta != 0.0 {
        add_hessian_mi(p, ws, beta, &mut h);
    }
    h
}

/// `I(X;Y_N)` in nats, from the induced joint `p(x, nu) = sum_k p(x, y_k) q_{nu k}`.
pub fn mutual_information(p: &JointDistribution, q: &Quantizer) -> Result<f64> {
    check_dims(p, q)?;
    Ok(mi_ws(p, &Workspace::new(p, q)))
}

/// `H(Y_N | Y) = -sum_k p_k sum_nu q_{nu k} ln q_{nu k}`.
pub fn conditional_entropy(p: &JointDistribution, q: &Quantizer) -> Result<f64> {
    check_dims(p, q)?;
    Ok(entropy_ws(p, q))
}

/// `I(Y;Y_N) = H(Y_N) - H(Y_N | Y)`, the compression cost of the quantizer.
pub fn compression_information(p: &JointDistribution, q: &Quantizer) -> Result<f64> {
    check_dims(p, q)?;
    Ok(compression_ws(p, q, &Workspace::new(p, q)))
}

/// `dI(X;Y_N) / dq_{nu k} = sum_x p(x, y_k) ln(p(x|nu) / p(x))`.
pub fn grad_mutual_information(p: &JointDistribution, q: &Quantizer) -> Result<DMatrix<f64>> {
    check_dims(p, q)?;
    Ok(grad_mi_ws(p, &Workspace::new(p, q)))
}

pub fn grad_conditional_entropy(p: &JointDistribution, q: &Quantizer) -> Result<DMatrix<f64>> {
    check_dims(p, q)?;
    Ok(grad_entropy_ws(p, q))
}

pub fn grad_compression_information(p: &JointDistribution, q: &Quantizer) -> Result<DMatrix<f64>> {
    check_dims(p, q)?;
    Ok(grad_compression_ws(p, q, &Workspace::new(p, q)))
}

pub fn objective_value(kind: ObjectiveKind, p: &JointDistribution, q: &Quantizer) -> Result<f64> {
    check_dims(p, q)?;
    Ok(objective_ws(kind, p, q, &Workspace::new(p, q)))
}

pub fn grad_objective(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
) -> Result<DMatrix<f64>> {
    check_dims(p, q)?;
    Ok(grad_objective_ws(kind, p, q, &Workspace::new(p, q)))
}

/// Hessian of `I(X;Y_N)` alone, `NK x NK`, class-major.
pub fn hessian_mutual_information(p: &JointDistribution, q: &Quantizer) -> Result<DMatrix<f64>> {
    check_dims(p, q)?;
    let ws = Workspace::new(p, q);
    let dim = q.classes() * q.symbols();
    let mut h = DMatrix::zeros(dim, dim);
    add_hessian_mi(p, &ws, 1.0, &mut h);
    Ok(h)
}

/// Hessian of `G(q) + beta * I(X;Y_N)`, `NK x NK`, class-major.
pub fn hessian_lagrangian(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
) -> Result<DMatrix<f64>> {
    check_dims(p, q)?;
    Ok(hessian_lagrangian_ws(
        kind,
        p,
        q,
        beta,
        &Workspace::new(p, q),
    ))
}
