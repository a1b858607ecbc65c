use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm below which a constraint gradient is treated as zero.
pub const DEGENERATE_GRADIENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `ker [I_K I_K ... I_K]`: tangent space of the normalization constraints.
    Lagrangian,
    /// The Lagrangian kernel intersected with the orthogonal complement of
    /// the information gradient.
    Constrained,
}

/// Orthonormal basis (columns) of one of the two tangent spaces, in
/// class-major coordinates.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub basis: DMatrix<f64>,
    pub kind: KernelKind,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `B^T H B`, symmetrized.
    pub fn project(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.basis.tr_mul(&(h * &self.basis));
        (&m + m.transpose()) * 0.5
    }
}

/// Helmert contrasts: `N - 1` orthonormal vectors in `R^N` summing to zero.
fn helmert(n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n - 1);
    for j in 1..n {
        let scale = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for nu in 0..j {
            h[(nu, j - 1)] = scale;
        }
        h[(j, j - 1)] = -(j as f64) * scale;
    }
    h
}

fn lagrangian_basis(symbols: usize, classes: usize) -> DMatrix<f64> {
    let h = helmert(classes);
    let mut b = DMatrix::zeros(classes * symbols, (classes - 1) * symbols);
    for j in 0..classes - 1 {
        for k in 0..symbols {
            for nu in 0..classes {
                b[(nu * symbols + k, j * symbols + k)] = h[(nu, j)];
            }
        }
    }
    b
}

/// Orthonormal kernel basis for the normalization constraints, optionally
/// stacked with the constraint gradient `grad_d` (an `N x K` matrix).
///
/// The construction is deterministic: Helmert contrasts per symbol for the
/// larger kernel, then a Householder reflection that maps the projected
/// gradient onto the first coordinate and keeps the remaining columns.
pub fn kernel_basis(
    symbols: usize,
    classes: usize,
    grad_d: Option<&DMatrix<f64>>,
) -> Result<KernelBasis> {
    if classes < 2 || symbols == 0 {
        return Err(Error::InvalidSpec(format!(
            "kernel needs N >= 2 and K >= 1 (got N = {classes}, K = {symbols})"
        )));
    }
    let base = lagrangian_basis(symbols, classes);
    let Some(g) = grad_d else {
        return Ok(KernelBasis {
            basis: base,
            kind: KernelKind::Lagrangian,
        });
    };
    if g.shape() != (classes, symbols) {
        return Err(Error::DimensionMismatch(format!(
            "gradient is {}x{}, expected {classes}x{symbols}",
            g.nrows(),
            g.ncols()
        )));
    }
    let flat = DVector::from_fn(classes * symbols, |i, _| g[(i / symbols, i % symbols)]);
    let mut c = base.tr_mul(&flat);
    let cn = c.norm();
    if flat.norm() < DEGENERATE_GRADIENT || cn < DEGENERATE_GRADIENT {
        return Err(Error::DegenerateKernel);
    }
    let sign = if c[0] >= 0.0 { 1.0 } else { -1.0 };
    c[0] += sign * cn;
    let u = c;
    let uu = u.norm_squared();
    // base * (I - 2 u u^T / u^T u), first column dropped.
    let bu = &base * &u;
    let reflected = &base - (bu * u.transpose()) * (2.0 / uu);
    let basis = reflected.columns(1, reflected.ncols() - 1).into_owned();
    Ok(KernelBasis {
        basis,
        kind: KernelKind::Constrained,
    })
}
