use serde::{Deserialize, Serialize};

use super::solve::CurvePoint;
use crate::anneal::{Branch, Provenance};
use crate::error::{Error, Result};
use crate::prob::ObjectiveKind;

/// Smallest segment [`verify_theorem3`] accepts.
pub const MIN_SEGMENT: usize = 5;

/// `(I0, beta)` pairs in curve order.
pub fn beta_of_i0(curve: &[CurvePoint]) -> Vec<(f64, f64)> {
    curve.iter().map(|c| (c.i0, c.beta)).collect()
}

/// `R + c + beta I + Lambda`, zero at every stationary point, where `c` is
/// the Euler offset of the objective.
pub fn identity_residual(kind: ObjectiveKind, cp: &CurvePoint) -> f64 {
    cp.r + kind.euler_offset() + cp.beta * cp.information + cp.lambda_sum()
}

/// Weights of the three-point first and second derivatives at `x1` on a
/// possibly uneven stencil `x0 < x1 < x2`.
fn stencil(x0: f64, x1: f64, x2: f64) -> ([f64; 3], [f64; 3]) {
    let (h0, h1) = (x1 - x0, x2 - x1);
    let d1 = [
        -h1 / (h0 * (h0 + h1)),
        (h1 - h0) / (h0 * h1),
        h0 / (h1 * (h0 + h1)),
    ];
    let d2 = [
        2.0 / (h0 * (h0 + h1)),
        -2.0 / (h0 * h1),
        2.0 / (h1 * (h0 + h1)),
    ];
    (d1, d2)
}

fn apply(w: [f64; 3], y: [f64; 3]) -> f64 {
    w[0] * y[0] + w[1] * y[1] + w[2] * y[2]
}

/// Finite-difference derivatives at one interior curve point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSample {
    pub i0: f64,
    pub beta: f64,
    pub dr_di0: f64,
    /// `|dR/dI0 + beta| / max(beta, 1e-6)`.
    pub rel_err: f64,
    pub d2r_di02: f64,
    pub dbeta_di0: f64,
}

/// Consecutive points sharing a branch id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub branch_id: usize,
    pub i0_start: f64,
    pub i0_end: f64,
    pub points: usize,
}

/// Checks of `dR/dI0 = -beta` and `d2R/dI0^2 = -dbeta/dI0` on smooth
/// segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Report {
    /// Largest `|dR/dI0 + beta| / max(beta, 1e-6)`.
    pub max_rel_err: f64,
    /// Largest `|d2R/dI0^2 + dbeta/dI0|`.
    pub max_second_derivative_err: f64,
    /// `I0` locations where `dbeta/dI0` changes sign, i.e. where `R`
    /// switches between concave and convex.
    pub sign_changes: Vec<f64>,
    pub segments: Vec<Segment>,
    pub samples: Vec<DerivativeSample>,
}

impl Theorem3Report {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

/// Splits a curve into maximal runs with one branch id.
pub fn smooth_segments(curve: &[CurvePoint]) -> Vec<&[CurvePoint]> {
    curve
        .chunk_by(|a, b| a.branch_id == b.branch_id && b.i0 > a.i0)
        .collect()
}

/// Compares finite differences of `R(I0)` with the recovered `beta(I0)`.
///
/// Only segments of at least [`MIN_SEGMENT`] points on one branch are
/// used; derivatives are taken at their interior points.
pub fn verify_theorem3(curve: &[CurvePoint]) -> Result<Theorem3Report> {
    let mut report = Theorem3Report {
        max_rel_err: 0.0,
        max_second_derivative_err: 0.0,
        sign_changes: Vec::new(),
        segments: Vec::new(),
        samples: Vec::new(),
    };
    for seg in smooth_segments(curve) {
        if seg.len() < MIN_SEGMENT {
            continue;
        }
        report.segments.push(Segment {
            branch_id: seg[0].branch_id,
            i0_start: seg[0].i0,
            i0_end: seg[seg.len() - 1].i0,
            points: seg.len(),
        });
        let mut last_slope: Option<(f64, f64)> = None;
        for w in seg.windows(3) {
            let (d1, d2) = stencil(w[0].i0, w[1].i0, w[2].i0);
            let r = [w[0].r, w[1].r, w[2].r];
            let b = [w[0].beta, w[1].beta, w[2].beta];
            let dr = apply(d1, r);
            let d2r = apply(d2, r);
            let db = apply(d1, b);
            let beta = w[1].beta;
            let rel_err = (dr + beta).abs() / beta.max(1e-6);
            report.max_rel_err = report.max_rel_err.max(rel_err);
            report.max_second_derivative_err =
                report.max_second_derivative_err.max((d2r + db).abs());
            if let Some((i0, prev)) = last_slope {
                if prev * db < 0.0 {
                    report.sign_changes.push(0.5 * (i0 + w[1].i0));
                }
            }
            if db != 0.0 {
                last_slope = Some((w[1].i0, db));
            }
            report.samples.push(DerivativeSample {
                i0: w[1].i0,
                beta,
                dr_di0: dr,
                rel_err,
                d2r_di02: d2r,
                dbeta_di0: db,
            });
        }
    }
    if report.segments.is_empty() {
        return Err(Error::SegmentTooShort {
            needed: MIN_SEGMENT,
        });
    }
    Ok(report)
}

/// `dLambda/dbeta` against `-I(X;Y_N)` at one interior branch point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSlope {
    pub beta: f64,
    pub information: f64,
    pub dlambda_dbeta: f64,
    /// `|dLambda/dbeta + I| / max(I, 1e-6)`.
    pub rel_err: f64,
}

/// Centered differences of `Lambda = sum_k lambda_k` in beta at every
/// interior point of `branch` whose neighbours lie on either side in beta.
pub fn lambda_slopes(branch: &Branch) -> Vec<LambdaSlope> {
    branch
        .points
        .windows(3)
        .filter(|w| (w[1].beta - w[0].beta) * (w[2].beta - w[1].beta) > 0.0)
        .map(|w| {
            let (a, b, c) = if w[0].beta < w[2].beta {
                (&w[0], &w[1], &w[2])
            } else {
                (&w[2], &w[1], &w[0])
            };
            let (d1, _) = stencil(a.beta, b.beta, c.beta);
            let slope = apply(d1, [a.lambda_sum(), b.lambda_sum(), c.lambda_sum()]);
            LambdaSlope {
                beta: b.beta,
                information: b.information,
                dlambda_dbeta: slope,
                rel_err: (slope + b.information).abs() / b.information.max(1e-6),
            }
        })
        .collect()
}

/// Turns each smooth segment of a curve into a [`Branch`] ordered by `I0`,
/// so that [`crate::spectral::detect_bifurcations`] can find turning
/// points in beta. Ids continue from `first_id`.
pub fn curve_branches(curve: &[CurvePoint], first_id: usize) -> Vec<Branch> {
    smooth_segments(curve)
        .into_iter()
        .enumerate()
        .map(|(i, seg)| Branch {
            id: first_id + i,
            signature: seg[seg.len() / 2].q.signature(),
            points: seg.iter().map(CurvePoint::to_stationary_point).collect(),
            provenance: Provenance::ConstrainedRecovery,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    use crate::prob::Quantizer;

    fn point(i0: f64, r: f64, beta: f64, branch_id: usize) -> CurvePoint {
        CurvePoint {
            i0,
            r,
            beta,
            branch_id,
            kkt_residual: 0.0,
            information: i0,
            q: Quantizer::uniform(2, 2),
            lambda: DVector::zeros(2),
        }
    }

    #[test]
    fn stencil_is_exact_on_quadratics() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        let (x0, x1, x2) = (0.1, 0.13, 0.2);
        let (d1, d2) = stencil(x0, x1, x2);
        let y = [f(x0), f(x1), f(x2)];
        assert!((apply(d1, y) - (6.0 * x1 - 2.0)).abs() < 1e-10);
        assert!((apply(d2, y) - 6.0).abs() < 1e-8);
    }

    #[test]
    fn exact_relation_has_no_error() {
        // R = -I0^2 / 2 - I0 has dR/dI0 = -(I0 + 1) = -beta.
        let curve: Vec<_> = (1..=10)
            .map(|i| {
                let x = i as f64 * 0.01;
                point(x, -0.5 * x * x - x, x + 1.0, 0)
            })
            .collect();
        let rep = verify_theorem3(&curve).unwrap();
        assert!(rep.max_rel_err < 1e-10);
        assert!(rep.sign_changes.is_empty());
        assert_eq!(rep.samples.len(), 8);
    }

    #[test]
    fn sign_change_of_beta_slope_is_flagged() {
        // beta = 2 + (I0 - 0.05)^2, R = -integral of beta.
        let curve: Vec<_> = (1..=10)
            .map(|i| {
                let x = i as f64 * 0.01;
                let c = x - 0.05;
                point(x, -(2.0 * x + c * c * c / 3.0), 2.0 + c * c, 0)
            })
            .collect();
        let rep = verify_theorem3(&curve).unwrap();
        assert_eq!(rep.sign_changes.len(), 1);
        assert!((rep.sign_changes[0] - 0.05).abs() < 0.011);
    }

    #[test]
    fn short_segments_are_rejected() {
        let mut curve: Vec<_> = (1..=8).map(|i| point(i as f64, 0.0, 0.0, 0)).collect();
        for c in curve.iter_mut().skip(4) {
            c.branch_id = 1;
        }
        assert!(matches!(
            verify_theorem3(&curve),
            Err(Error::SegmentTooShort { needed: 5 })
        ));
    }

    #[test]
    fn single_point_beta_trace_passes_through() {
        assert_eq!(beta_of_i0(&[point(0.3, -1.0, 1.7, 0)]), vec![(0.3, 1.7)]);
    }
}
