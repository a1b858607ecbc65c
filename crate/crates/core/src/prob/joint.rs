use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Discrete joint distribution `p(x_i, y_k)` with cached marginals.
///
/// Rows index the relevant variable `X`, columns index the source `Y`
/// that gets quantized.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    p: DMatrix<f64>,
    p_x: DVector<f64>,
    p_y: DVector<f64>,
    mutual_information: f64,
}

impl JointDistribution {
    /// Validates and wraps a `K_X x K` probability matrix.
    ///
    /// Entries must be finite and non-negative, sum to one within `1e-12`,
    /// and every column must carry positive mass.
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() == 0 || p.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "joint distribution is empty".into(),
            ));
        }
        for col in 0..p.ncols() {
            for row in 0..p.nrows() {
                let value = p[(row, col)];
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidEntry { row, col, value });
                }
            }
        }
        let sum = p.sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let p_x = DVector::from_iterator(p.nrows(), p.row_iter().map(|r| r.sum()));
        let p_y = DVector::from_iterator(p.ncols(), p.column_iter().map(|c| c.sum()));
        if let Some(col) = p_y.iter().position(|&m| m <= 0.0) {
            return Err(Error::ZeroColumnMass { col });
        }

        let mut mi = 0.0;
        for k in 0..p.ncols() {
            for x in 0..p.nrows() {
                let pxy = p[(x, k)];
                if pxy > 0.0 {
                    mi += pxy * (pxy / (p_x[x] * p_y[k])).ln();
                }
            }
        }

        Ok(Self {
            p,
            p_x,
            p_y,
            mutual_information: mi.max(0.0),
        })
    }

    /// Rescales a non-negative matrix to unit mass before validating.
    pub fn from_unnormalized(mut p: DMatrix<f64>) -> Result<Self> {
        let sum = p.sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::NotNormalized { sum });
        }
        p /= sum;
        Self::new(p)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Number of `X` symbols (`K_X`).
    pub fn x_size(&self) -> usize {
        self.p.nrows()
    }

    /// Number of `Y` symbols (`K`).
    pub fn y_size(&self) -> usize {
        self.p.ncols()
    }

    pub fn p_x(&self) -> &DVector<f64> {
        &self.p_x
    }

    /// Marginal `p_k = p(y_k)`.
    pub fn p_y(&self) -> &DVector<f64> {
        &self.p_y
    }

    /// `I(X;Y)` in nats, the upper limit of `I(X;Y_N)`.
    pub fn mutual_information(&self) -> f64 {
        self.mutual_information
    }

    /// Entropy `H(Y)` in nats.
    pub fn entropy_y(&self) -> f64 {
        -self
            .p_y
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| m * m.ln())
            .sum::<f64>()
    }
}
