use nalgebra::{DMatrix, Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::JointDistribution;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One Gaussian bump on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    /// `(x, y)` centre.
    pub mean: [f64; 2],
    /// Row-major `2 x 2` covariance.
    pub covariance: [[f64; 2]; 2],
    pub weight: f64,
}

/// Mixture of Gaussians discretized on a `K_X x K` grid over `[0,1]^2`.
///
/// The first coordinate indexes `X` (rows), the second indexes `Y`
/// (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub components: Vec<GaussianComponent>,
    /// `(K_X, K)`.
    pub grid: (usize, usize),
    /// Standard deviation of a random shift applied to every mean; zero
    /// disables it.
    pub jitter: f64,
    pub rng_seed: u64,
}

impl Default for GaussianMixtureSpec {
    /// Four isotropic components with `sigma = 0.1` on the diagonal at
    /// `0.2, 0.4, 0.6, 0.8`, weights `0.4, 0.3, 0.2, 0.1`, on a `52 x 52`
    /// grid.
    fn default() -> Self {
        Self::diagonal(4, 0.1, (52, 52))
    }
}

impl GaussianMixtureSpec {
    /// `c` isotropic components with means `((i+1)/(c+1), (i+1)/(c+1))`
    /// and weights proportional to `c - i`.
    pub fn diagonal(c: usize, sigma: f64, grid: (usize, usize)) -> Self {
        let total = (c * (c + 1) / 2) as f64;
        let components = (0..c)
            .map(|i| {
                let m = (i + 1) as f64 / (c + 1) as f64;
                GaussianComponent {
                    mean: [m, m],
                    covariance: [[sigma * sigma, 0.0], [0.0, sigma * sigma]],
                    weight: (c - i) as f64 / total,
                }
            })
            .collect();
        Self {
            components,
            grid,
            jitter: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.components.is_empty() {
            return bad("need at least one component".into());
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return bad(format!(
                "grid {}x{} is smaller than 2x2",
                self.grid.0, self.grid.1
            ));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad("jitter must be finite and non-negative".into());
        }
        let mut sum = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return bad(format!("component {i} has weight {}", c.weight));
            }
            sum += c.weight;
            if !c.mean.iter().all(|m| m.is_finite()) {
                return bad(format!("component {i} has a non-finite mean"));
            }
            let s = c.covariance;
            if s[0][1] != s[1][0] {
                return bad(format!("component {i} covariance is not symmetric"));
            }
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            if !(s[0][0] > 0.0 && det > 0.0 && det.is_finite()) {
                return bad(format!("component {i} covariance is not positive definite"));
            }
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return bad(format!("weights sum to {sum}, expected 1"));
        }
        Ok(())
    }
}

/// Evaluates the mixture density at grid cell centres and normalizes.
pub fn gen_four_gaussian(spec: &GaussianMixtureSpec) -> Result<JointDistribution> {
    spec.validate()?;
    let (kx, ky) = spec.grid;
    let mut means: Vec<Vector2<f64>> = spec
        .components
        .iter()
        .map(|c| Vector2::new(c.mean[0], c.mean[1]))
        .collect();
    if spec.jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let normal = Normal::new(0.0, spec.jitter)
            .map_err(|e| Error::InvalidSpec(format!("jitter: {e}")))?;
        for m in &mut means {
            m[0] += normal.sample(&mut rng);
            m[1] += normal.sample(&mut rng);
        }
    }
    let precisions: Vec<(Matrix2<f64>, f64)> = spec
        .components
        .iter()
        .map(|c| {
            let s = Matrix2::new(
                c.covariance[0][0],
                c.covariance[0][1],
                c.covariance[1][0],
                c.covariance[1][1],
            );
            let inv = s
                .try_inverse()
                .ok_or_else(|| Error::InvalidSpec("degenerate covariance".into()))?;
            Ok((inv, c.weight / s.determinant().sqrt()))
        })
        .collect::<Result<_>>()?;

    let p = DMatrix::from_fn(kx, ky, |i, k| {
        let z = Vector2::new((i as f64 + 0.5) / kx as f64, (k as f64 + 0.5) / ky as f64);
        means
            .iter()
            .zip(&precisions)
            .map(|(m, (inv, scale))| {
                let d = z - m;
                scale * (-0.5 * d.dot(&(inv * d))).exp()
            })
            .sum::<f64>()
    });
    JointDistribution::from_unnormalized(p)
}

/// Uniform binary input through a symmetric channel that flips with
/// probability `eps`: `p = [[1 - eps, eps], [eps, 1 - eps]] / 2`.
pub fn binary_symmetric(eps: f64) -> Result<JointDistribution> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "flip probability {eps} not in (0, 1)"
        )));
    }
    JointDistribution::new(DMatrix::from_row_slice(
        2,
        2,
        &[0.5 * (1.0 - eps), 0.5 * eps, 0.5 * eps, 0.5 * (1.0 - eps)],
    ))
}
