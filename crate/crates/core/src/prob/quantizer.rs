use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-10;

/// Rows closer than this (sup-norm) are considered the same class.
pub const SIGNATURE_TOL: f64 = 1e-6;

/// Column-stochastic conditional probability `q(Y_N = nu | Y = y_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    q: DMatrix<f64>,
}

impl Quantizer {
    /// Wraps an `N x K` matrix after checking it lies in the simplex product.
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() == 0 || q.ncols() == 0 {
            return Err(Error::DimensionMismatch("quantizer is empty".into()));
        }
        for col in 0..q.ncols() {
            for row in 0..q.nrows() {
                let value = q[(row, col)];
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidEntry { row, col, value });
                }
            }
            let sum = q.column(col).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic { col, sum });
            }
        }
        Ok(Self { q })
    }

    /// Divides every column by its sum. Columns must have positive mass.
    pub fn normalized(mut q: DMatrix<f64>) -> Result<Self> {
        for (col, mut c) in q.column_iter_mut().enumerate() {
            let sum = c.sum();
            if !(sum.is_finite() && sum > 0.0) {
                return Err(Error::NotStochastic { col, sum });
            }
            c /= sum;
        }
        Self::new(q)
    }

    pub(crate) fn from_normalized_unchecked(q: DMatrix<f64>) -> Self {
        Self { q }
    }

    /// The homogeneous quantizer `q_{nu k} = 1/N`.
    pub fn uniform(classes: usize, symbols: usize) -> Self {
        Self {
            q: DMatrix::from_element(classes, symbols, 1.0 / classes as f64),
        }
    }

    /// Deterministic quantizer sending symbol `k` to class `assignment[k]`.
    pub fn deterministic(classes: usize, assignment: &[usize]) -> Result<Self> {
        let mut q = DMatrix::zeros(classes, assignment.len());
        for (k, &nu) in assignment.iter().enumerate() {
            if nu >= classes {
                return Err(Error::DimensionMismatch(format!(
                    "class {nu} out of range for N = {classes}"
                )));
            }
            q[(nu, k)] = 1.0;
        }
        Ok(Self { q })
    }

    pub fn classes(&self) -> usize {
        self.q.nrows()
    }

    pub fn symbols(&self) -> usize {
        self.q.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.q
    }

    pub fn get(&self, class: usize, symbol: usize) -> f64 {
        self.q[(class, symbol)]
    }

    /// Class-major flattening, `index = nu * K + k`.
    pub fn flatten(&self) -> Vec<f64> {
        let (n, k) = self.q.shape();
        let mut out = Vec::with_capacity(n * k);
        for nu in 0..n {
            for s in 0..k {
                out.push(self.q[(nu, s)]);
            }
        }
        out
    }

    pub fn min_entry(&self) -> f64 {
        self.q.min()
    }

    pub fn sup_distance(&self, other: &Quantizer) -> f64 {
        (&self.q - &other.q).amax()
    }

    /// Row `perm[nu]` of the result is row `nu` of `self`.
    pub fn permute_classes(&self, perm: &[usize]) -> Quantizer {
        let mut q = DMatrix::zeros(self.q.nrows(), self.q.ncols());
        for (nu, &target) in perm.iter().enumerate() {
            q.set_row(target, &self.q.row(nu));
        }
        Quantizer { q }
    }

    /// Relabels classes so rows are in descending lexicographic order.
    ///
    /// Two quantizers that differ only by a class permutation have the same
    /// canonical form.
    pub fn canonical(&self) -> Quantizer {
        let mut rows: Vec<usize> = (0..self.q.nrows()).collect();
        rows.sort_by(|&a, &b| lex_cmp(&self.q, b, a));
        let mut q = DMatrix::zeros(self.q.nrows(), self.q.ncols());
        for (target, &source) in rows.iter().enumerate() {
            q.set_row(target, &self.q.row(source));
        }
        Quantizer { q }
    }

    /// Distance after canonical relabeling of both operands.
    pub fn canonical_distance(&self, other: &Quantizer) -> f64 {
        self.canonical().sup_distance(&other.canonical())
    }

    /// Sizes of the groups of identical classes, largest first.
    pub fn signature(&self) -> SymmetrySignature {
        let n = self.q.nrows();
        let mut group: Vec<Option<usize>> = vec![None; n];
        let mut sizes = Vec::new();
        for a in 0..n {
            if group[a].is_some() {
                continue;
            }
            group[a] = Some(sizes.len());
            let mut size = 1;
            let id = sizes.len();
            for (b, g) in group.iter_mut().enumerate().skip(a + 1) {
                if g.is_none() && (self.q.row(a) - self.q.row(b)).amax() < SIGNATURE_TOL {
                    *g = Some(id);
                    size += 1;
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        SymmetrySignature(sizes)
    }
}

fn lex_cmp(q: &DMatrix<f64>, a: usize, b: usize) -> Ordering {
    for k in 0..q.ncols() {
        match q[(a, k)].total_cmp(&q[(b, k)]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Partition of the classes into groups of identical rows, e.g. `3+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetrySignature(pub Vec<usize>);

impl SymmetrySignature {
    pub fn is_symmetric(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for SymmetrySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_stochastic() {
        let q = Quantizer::uniform(3, 5);
        assert!(Quantizer::new(q.matrix().clone()).is_ok());
        assert_eq!(q.signature().to_string(), "3");
    }

    #[test]
    fn rejects_bad_column() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.7, 0.5, 0.2]);
        assert!(matches!(
            Quantizer::new(m),
            Err(Error::NotStochastic { col: 1, .. })
        ));
    }

    #[test]
    fn canonical_form_ignores_relabeling() {
        let q = Quantizer::normalized(DMatrix::from_row_slice(
            3,
            2,
            &[0.2, 0.5, 0.3, 0.1, 0.5, 0.4],
        ))
        .unwrap();
        let permuted = q.permute_classes(&[2, 0, 1]);
        assert!(q.sup_distance(&permuted) > 0.1);
        assert_eq!(q.canonical_distance(&permuted), 0.0);
    }

    #[test]
    fn signature_groups_equal_rows() {
        let q = Quantizer::normalized(DMatrix::from_row_slice(
            4,
            2,
            &[0.1, 0.4, 0.3, 0.2, 0.3, 0.2, 0.3, 0.2],
        ))
        .unwrap();
        assert_eq!(q.signature(), SymmetrySignature(vec![3, 1]));
    }

    #[test]
    fn flatten_is_class_major() {
        let q = Quantizer::deterministic(2, &[0, 1, 1]).unwrap();
        assert_eq!(q.flatten(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }
}
