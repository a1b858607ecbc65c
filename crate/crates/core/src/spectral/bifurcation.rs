use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::classify::{classify_stationary_point, lagrangian_spectrum, sorted_eigen};
use crate::anneal::{continue_at_beta, Branch, StationaryPoint};
use crate::error::Result;
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer};

/// Bisection stops once the bracket is this narrow.
pub const BETA_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BifurcationKind {
    /// Symmetry-breaking eigenvalue crossing.
    PitchforkLike,
    /// Turning point: beta reverses direction along the branch.
    SaddleNode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub beta: f64,
    pub kind: BifurcationKind,
    /// `I(X;Y_N)` at the event.
    pub information: f64,
    /// Leading eigenvector of the projected Hessian at the event, as an
    /// `N x K` matrix.
    #[serde(skip)]
    pub eigenvector: Option<DMatrix<f64>>,
    pub parent: usize,
    pub children: Vec<usize>,
}

fn is_unstable(
    kind: ObjectiveKind,
    p: &JointDistribution,
    sp: &StationaryPoint,
    tol_eig: f64,
) -> Result<bool> {
    Ok(match &sp.classification {
        Some(c) => c.is_unstable(),
        None => classify_stationary_point(kind, p, sp, tol_eig)?.is_unstable(),
    })
}

fn interpolate(a: &Quantizer, b: &Quantizer, t: f64) -> Quantizer {
    let m = a.matrix() * (1.0 - t) + b.matrix() * t;
    Quantizer::normalized(m).unwrap_or_else(|_| a.clone())
}

fn leading_direction(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
) -> Result<(f64, DMatrix<f64>)> {
    let (values, vectors) = lagrangian_spectrum(kind, p, q, beta)?;
    let (n, k) = (q.classes(), q.symbols());
    let top = values.first().copied().unwrap_or(f64::NEG_INFINITY);
    let v = DMatrix::from_fn(n, k, |nu, s| vectors[(nu * k + s, 0)]);
    Ok((top, v))
}

/// Narrows the stability change between `lo` (stability `lo_unstable`) and
/// `hi` to [`BETA_RESOLUTION`]. Intermediate points are found by Newton at
/// fixed beta, so the bracket stays on this branch even where it is unstable.
fn refine_crossing(
    kind: ObjectiveKind,
    p: &JointDistribution,
    lo: &StationaryPoint,
    hi: &StationaryPoint,
    lo_unstable: bool,
    tol_eig: f64,
) -> Result<(f64, Quantizer)> {
    let (mut b_lo, mut b_hi) = (lo.beta, hi.beta);
    let (mut q_lo, mut q_hi) = (lo.q.clone(), hi.q.clone());
    while (b_hi - b_lo).abs() > BETA_RESOLUTION {
        let mid = 0.5 * (b_lo + b_hi);
        let guess = interpolate(&q_lo, &q_hi, 0.5);
        let Ok(sp) = continue_at_beta(kind, p, &guess, mid) else {
            break;
        };
        if is_unstable(kind, p, &sp, tol_eig)? == lo_unstable {
            b_lo = mid;
            q_lo = sp.q;
        } else {
            b_hi = mid;
            q_hi = sp.q;
        }
    }
    Ok((0.5 * (b_lo + b_hi), q_lo))
}

/// Scans a branch for bifurcations.
///
/// A `PitchforkLike` event is reported where the largest eigenvalue of the
/// Hessian on the normalization kernel changes sign (crosses `tol_eig`)
/// between adjacent points; its beta is refined by bisection. A
/// `SaddleNode` is reported where beta turns around along the arc order,
/// located by a parabola through the three points around the turn.
pub fn detect_bifurcations(
    kind: ObjectiveKind,
    p: &JointDistribution,
    branch: &Branch,
    tol_eig: f64,
) -> Result<Vec<BifurcationEvent>> {
    let pts = &branch.points;
    let mut events = Vec::new();
    if pts.len() < 2 || pts[0].q.classes() < 2 {
        return Ok(events);
    }

    let mut unstable = Vec::with_capacity(pts.len());
    for sp in pts {
        unstable.push(is_unstable(kind, p, sp, tol_eig)?);
    }
    for i in 0..pts.len() - 1 {
        if unstable[i] == unstable[i + 1] || pts[i].beta == pts[i + 1].beta {
            continue;
        }
        // Turning points also flip stability; those are reported below.
        if is_turn(pts, i) || is_turn(pts, i + 1) {
            continue;
        }
        let (beta, q) = refine_crossing(kind, p, &pts[i], &pts[i + 1], unstable[i], tol_eig)?;
        let (_, v) = leading_direction(kind, p, &q, beta)?;
        let information = crate::prob::mutual_information(p, &q)?;
        events.push(BifurcationEvent {
            beta,
            kind: BifurcationKind::PitchforkLike,
            information,
            eigenvector: Some(v),
            parent: branch.id,
            children: Vec::new(),
        });
    }

    for i in 1..pts.len().saturating_sub(1) {
        if !is_turn(pts, i) {
            continue;
        }
        let beta = parabola_vertex(
            [
                pts[i - 1].information,
                pts[i].information,
                pts[i + 1].information,
            ],
            [pts[i - 1].beta, pts[i].beta, pts[i + 1].beta],
        )
        .unwrap_or(pts[i].beta);
        let (_, v) = leading_direction(kind, p, &pts[i].q, pts[i].beta)?;
        events.push(BifurcationEvent {
            beta,
            kind: BifurcationKind::SaddleNode,
            information: pts[i].information,
            eigenvector: Some(v),
            parent: branch.id,
            children: Vec::new(),
        });
    }
    events.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    Ok(events)
}

/// First instability of the uniform quantizer.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// Smallest beta at which the uniform quantizer stops solving the
    /// annealed problem.
    pub beta: f64,
    /// Symbol profile `w` of the critical directions `u (x) w`, where `u`
    /// is any zero-sum class vector. Normalized so that
    /// `sum_k p_k w_k^2 = 1`.
    pub direction: DVector<f64>,
}

/// Critical beta of the uniform quantizer, the same for both objectives.
///
/// With `C_kl = sum_x p(x,k) p(x,l) / p(x) - p_k p_l` and `D = diag(p_k)`,
/// the Hessian of either Lagrangian at the uniform quantizer is singular
/// along `u (x) w` exactly when `beta C w = D w`, so
/// `beta* = 1 / lambda_max(D^-1/2 C D^-1/2)`. Returns `None` when `X` and
/// `Y` are independent.
pub fn critical_beta(p: &JointDistribution) -> Option<CriticalPoint> {
    let m = p.matrix();
    let (px, py) = (p.p_x(), p.p_y());
    let k = p.y_size();
    let mut c = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let mut v = -py[a] * py[b];
            for x in 0..p.x_size() {
                if px[x] > 0.0 {
                    v += m[(x, a)] * m[(x, b)] / px[x];
                }
            }
            c[(a, b)] = v / (py[a] * py[b]).sqrt();
            c[(b, a)] = c[(a, b)];
        }
    }
    let (values, vectors) = sorted_eigen(c);
    let top = *values.first()?;
    if top <= 1e-14 {
        return None;
    }
    let direction = DVector::from_fn(k, |s, _| vectors[(s, 0)] / py[s].sqrt());
    Some(CriticalPoint {
        beta: 1.0 / top,
        direction,
    })
}

fn is_turn(pts: &[StationaryPoint], i: usize) -> bool {
    if i == 0 || i + 1 >= pts.len() {
        return false;
    }
    let d1 = pts[i].beta - pts[i - 1].beta;
    let d2 = pts[i + 1].beta - pts[i].beta;
    d1 * d2 < 0.0
}

/// Extremal value of the parabola through three `(x, y)` points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d0 = (x[0] - x[1]) * (x[0] - x[2]);
    let d1 = (x[1] - x[0]) * (x[1] - x[2]);
    let d2 = (x[2] - x[0]) * (x[2] - x[1]);
    if d0 == 0.0 || d1 == 0.0 || d2 == 0.0 {
        return None;
    }
    // y = a x^2 + b x + c
    let a = y[0] / d0 + y[1] / d1 + y[2] / d2;
    let b = -(y[0] * (x[1] + x[2]) / d0 + y[1] * (x[0] + x[2]) / d1 + y[2] * (x[0] + x[1]) / d2);
    let c = y[0] * x[1] * x[2] / d0 + y[1] * x[0] * x[2] / d1 + y[2] * x[0] * x[1] / d2;
    if a == 0.0 {
        return None;
    }
    let xv = -b / (2.0 * a);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo..=hi).contains(&xv) {
        return None;
    }
    Some(a * xv * xv + b * xv + c)
}
