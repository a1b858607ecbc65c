//! Reference implementations written directly from the definitions, with no
//! shared code paths with the library.

#![allow(dead_code)]

use infodist::{JointDistribution, Quantizer};
use nalgebra::DMatrix;

fn xlogx_ratio(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        a * (a / b).ln()
    } else {
        0.0
    }
}

/// `sum_{x,nu} p(x,nu) ln p(x,nu) / (p(x) p(nu))`, with
/// `p(x,nu) = sum_k q(nu|k) p(x,k)`.
pub fn mi_oracle(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let (kx, k) = p.shape();
    let n = q.nrows();
    let px: Vec<f64> = (0..kx).map(|x| (0..k).map(|y| p[(x, y)]).sum()).collect();
    let mut total = 0.0;
    for nu in 0..n {
        let pxn: Vec<f64> = (0..kx)
            .map(|x| (0..k).map(|y| q[(nu, y)] * p[(x, y)]).sum())
            .collect();
        let pn: f64 = pxn.iter().sum();
        for x in 0..kx {
            total += xlogx_ratio(pxn[x], px[x] * pn);
        }
    }
    total
}

/// `-sum_k p(k) sum_nu q(nu|k) ln q(nu|k)`.
pub fn cond_entropy_oracle(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let mut h = 0.0;
    for y in 0..p.ncols() {
        let py: f64 = p.column(y).sum();
        for nu in 0..q.nrows() {
            let v = q[(nu, y)];
            if v > 0.0 {
                h -= py * v * v.ln();
            }
        }
    }
    h
}

/// `I(Y;Y_N) = sum_{k,nu} p(k) q(nu|k) ln q(nu|k) / p(nu)`.
pub fn compression_oracle(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let py: Vec<f64> = (0..p.ncols()).map(|y| p.column(y).sum()).collect();
    let mut total = 0.0;
    for nu in 0..q.nrows() {
        let pn: f64 = (0..p.ncols()).map(|y| q[(nu, y)] * py[y]).sum();
        for y in 0..p.ncols() {
            total += py[y] * xlogx_ratio(q[(nu, y)], pn);
        }
    }
    total
}

/// `dI/dq(nu|k) = sum_x p(x,k) ln p(x,nu) / (p(x) p(nu))`.
pub fn grad_mi_oracle(p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let (kx, k) = p.shape();
    let n = q.nrows();
    let px: Vec<f64> = (0..kx).map(|x| p.row(x).sum()).collect();
    DMatrix::from_fn(n, k, |nu, y| {
        let pxn: Vec<f64> = (0..kx)
            .map(|x| (0..k).map(|j| q[(nu, j)] * p[(x, j)]).sum())
            .collect();
        let pn: f64 = pxn.iter().sum();
        (0..kx)
            .map(|x| p[(x, y)] * (pxn[x] / (px[x] * pn)).ln())
            .sum()
    })
}

/// Multipliers solving the stationarity equations of `H + beta I` in
/// closed form: `lambda_k = p_k (1 - ln sum_nu exp(beta dI/dq(nu|k) / p_k))`.
pub fn lambda_oracle(p: &DMatrix<f64>, q: &DMatrix<f64>, beta: f64) -> Vec<f64> {
    let g = grad_mi_oracle(p, q);
    (0..p.ncols())
        .map(|y| {
            let py: f64 = p.column(y).sum();
            let s: f64 = (0..q.nrows())
                .map(|nu| (beta * g[(nu, y)] / py).exp())
                .sum();
            py * (1.0 - s.ln())
        })
        .collect()
}

/// Best `H(Y_N|Y)` over a grid of two-class quantizers on three symbols
/// whose information lies within `band` of each target. `None` where no
/// grid point qualifies.
pub fn grid_search_rh(p: &DMatrix<f64>, step: f64, targets: &[f64], band: f64) -> Vec<Option<f64>> {
    assert_eq!(p.ncols(), 3);
    let m = (1.0 / step).round() as usize;
    let mut best: Vec<Option<f64>> = vec![None; targets.len()];
    let mut q = DMatrix::zeros(2, 3);
    for a in 0..=m {
        for b in 0..=m {
            for c in 0..=m {
                for (y, v) in [a, b, c].into_iter().enumerate() {
                    let t = v as f64 / m as f64;
                    q[(0, y)] = t;
                    q[(1, y)] = 1.0 - t;
                }
                let i = mi_oracle(p, &q);
                let mut h = None;
                for (slot, &i0) in best.iter_mut().zip(targets) {
                    if (i - i0).abs() < band {
                        let hv = *h.get_or_insert_with(|| cond_entropy_oracle(p, &q));
                        *slot = Some(slot.map_or(hv, |b: f64| b.max(hv)));
                    }
                }
            }
        }
    }
    best
}

pub fn joint(rows: usize, cols: usize, data: &[f64]) -> JointDistribution {
    JointDistribution::new(DMatrix::from_row_slice(rows, cols, data)).expect("valid joint")
}

pub fn quantizer(rows: usize, cols: usize, data: &[f64]) -> Quantizer {
    Quantizer::new(DMatrix::from_row_slice(rows, cols, data)).expect("valid quantizer")
}

/// A 3 x 3 joint with a clear block structure.
pub fn desk_joint() -> JointDistribution {
    joint(
        3,
        3,
        &[0.25, 0.05, 0.03, 0.04, 0.20, 0.06, 0.02, 0.05, 0.30],
    )
}

/// A nearly noiseless 3 x 3 channel; the multiplier stays close to one.
pub fn sharp_joint() -> JointDistribution {
    joint(
        3,
        3,
        &[0.30, 0.02, 0.01, 0.02, 0.30, 0.02, 0.01, 0.02, 0.30],
    )
}
