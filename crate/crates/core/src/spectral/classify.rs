use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_basis, KernelBasis};
use crate::anneal::StationaryPoint;
use crate::error::{Error, Result};
use crate::prob::functionals::{grad_mi_ws, hessian_lagrangian_ws, Workspace};
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer};

/// Eigenvalues within this distance of zero are not treated as definite.
pub const DEFAULT_TOL_EIG: f64 = 1e-8;

/// Outcome of the two second-order tests at a stationary point.
///
/// Both tests are sufficient conditions only. A point failing a test is
/// not shown to be a non-solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralClassification {
    /// Eigenvalues of the Hessian projected on the normalization kernel,
    /// descending.
    pub lagrangian_eigenvalues: Vec<f64>,
    /// Eigenvalues on the constrained kernel, `None` when the information
    /// gradient vanishes (e.g. at the uniform quantizer).
    pub constrained_eigenvalues: Option<Vec<f64>>,
    /// Local maximizer of the annealed Lagrangian at fixed beta.
    pub solves_lagrangian: bool,
    /// Local maximizer of the problem with the information constraint.
    pub solves_constrained: Option<bool>,
    pub tol_eig: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Negative definite on the larger kernel (hence also on the smaller).
    SolvesBoth,
    /// Only the constrained test passes: a constrained solution that the
    /// annealed problem does not reach.
    ConstrainedOnly,
    Indeterminate,
}

impl SpectralClassification {
    pub fn lagrangian_margin(&self) -> f64 {
        self.lagrangian_eigenvalues
            .first()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn constrained_margin(&self) -> Option<f64> {
        self.constrained_eigenvalues
            .as_ref()
            .map(|e| e.first().copied().unwrap_or(f64::NEG_INFINITY))
    }

    /// Positive curvature along some normalization-preserving direction.
    pub fn is_unstable(&self) -> bool {
        self.lagrangian_margin() > self.tol_eig
    }

    pub fn verdict(&self) -> Verdict {
        match (self.solves_lagrangian, self.solves_constrained) {
            (true, _) => Verdict::SolvesBoth,
            (false, Some(true)) => Verdict::ConstrainedOnly,
            _ => Verdict::Indeterminate,
        }
    }
}

/// Descending eigen-decomposition of a symmetric matrix.
pub(crate) fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    if m.nrows() == 0 {
        return (Vec::new(), m);
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Projected Hessian spectrum on the normalization kernel, with the
/// eigenvectors mapped back to full class-major coordinates.
pub fn lagrangian_spectrum(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check(p, q)?;
    let ws = Workspace::new(p, q);
    let h = hessian_lagrangian_ws(kind, p, q, beta, &ws);
    let kb = kernel_basis(q.symbols(), q.classes(), None)?;
    let (values, vectors) = sorted_eigen(kb.project(&h));
    Ok((values, &kb.basis * vectors))
}

pub fn classify_quantizer(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q: &Quantizer,
    beta: f64,
    tol_eig: f64,
) -> Result<SpectralClassification> {
    check(p, q)?;
    let ws = Workspace::new(p, q);
    let h = hessian_lagrangian_ws(kind, p, q, beta, &ws);
    let (n, k) = (q.classes(), q.symbols());

    let lagrangian = kernel_basis(k, n, None)?;
    let (lag_values, _) = sorted_eigen(lagrangian.project(&h));
    let solves_lagrangian = lag_values.first().is_none_or(|&v| v < -tol_eig);

    let grad_i = grad_mi_ws(p, &ws);
    let constrained: Option<KernelBasis> = match kernel_basis(k, n, Some(&grad_i)) {
        Ok(kb) => Some(kb),
        Err(Error::DegenerateKernel) => None,
        Err(e) => return Err(e),
    };
    let constrained_values = constrained.map(|kb| sorted_eigen(kb.project(&h)).0);
    let solves_constrained = constrained_values
        .as_ref()
        .map(|v| v.first().is_none_or(|&top| top < -tol_eig));

    Ok(SpectralClassification {
        lagrangian_eigenvalues: lag_values,
        constrained_eigenvalues: constrained_values,
        solves_lagrangian,
        solves_constrained,
        tol_eig,
    })
}

/// Applies both kernel tests to a converged stationary point.
pub fn classify_stationary_point(
    kind: ObjectiveKind,
    p: &JointDistribution,
    sp: &StationaryPoint,
    tol_eig: f64,
) -> Result<SpectralClassification> {
    classify_quantizer(kind, p, &sp.q, sp.beta, tol_eig)
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
