use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::fixed_point::{multipliers_ws, residual_ws, update_ws};
use crate::error::{Error, Result};
use crate::kkt::{solve_kkt, Constraint, NewtonOptions};
use crate::prob::functionals::{mi_ws, objective_ws, Workspace};
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer};
use crate::spectral::SpectralClassification;

/// A quantizer at which the gradient of the annealed Lagrangian vanishes.
#[derive(Debug, Clone)]
pub struct StationaryPoint {
    pub q: Quantizer,
    pub beta: f64,
    /// Multipliers of the normalization constraints, one per symbol.
    pub lambda: DVector<f64>,
    /// `|| grad G + beta grad I + lambda ||_inf`.
    pub kkt_residual: f64,
    /// `G(q)`.
    pub objective: f64,
    /// `I(X;Y_N)`.
    pub information: f64,
    pub classification: Option<SpectralClassification>,
}

impl StationaryPoint {
    /// Evaluates multipliers, residual and functionals at `q`.
    pub fn evaluate(
        kind: ObjectiveKind,
        p: &JointDistribution,
        q: Quantizer,
        beta: f64,
    ) -> Result<Self> {
        if p.y_size() != q.symbols() {
            return Err(Error::DimensionMismatch(format!(
                "joint has K = {} symbols, quantizer has {}",
                p.y_size(),
                q.symbols()
            )));
        }
        let ws = Workspace::new(p, &q);
        let lambda = multipliers_ws(kind, p, &q, beta, &ws)?;
        let kkt_residual = residual_ws(kind, p, &q, beta, &lambda, &ws);
        let objective = objective_ws(kind, p, &q, &ws);
        let information = mi_ws(p, &ws);
        Ok(Self {
            q,
            beta,
            lambda,
            kkt_residual,
            objective,
            information,
            classification: None,
        })
    }

    /// `Lambda = sum_k lambda_k`.
    pub fn lambda_sum(&self) -> f64 {
        self.lambda.sum()
    }
}

/// Stopping rules for [`solve_at_beta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Sup-norm change of `q` between iterations that counts as converged.
    pub convergence_tol: f64,
    pub max_fixed_point_iters: usize,
    /// Finish with a few Newton steps on the KKT system.
    pub polish: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            convergence_tol: 1e-10,
            max_fixed_point_iters: 5000,
            polish: true,
        }
    }
}

/// An unsettled iterate is still accepted when its stationarity residual
/// is this small. Along flat directions the iteration can drift slowly
/// while already being stationary.
const KKT_ACCEPT: f64 = 1e-9;

/// Unsettled solves are resumed this many times, each with the full
/// iteration budget. Just past a bifurcation the iterate leaves an unstable
/// solution at a rate proportional to the distance in `beta`.
const MAX_ROUNDS: usize = 10;

/// Polishing may only move the iterate this far.
const POLISH_RADIUS: f64 = 1e-4;

/// Finds a stationary point at `beta` by fixed-point iteration from `q0`.
///
/// Near a bifurcation the iteration contracts very slowly; if it has not
/// settled after the iteration budget, Newton on the KKT system is tried
/// from the last iterate, and failing that the iteration is resumed.
pub fn solve_at_beta(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q0: &Quantizer,
    beta: f64,
    settings: &SolverSettings,
) -> Result<StationaryPoint> {
    if p.y_size() != q0.symbols() {
        return Err(Error::DimensionMismatch(format!(
            "joint has K = {} symbols, quantizer has {}",
            p.y_size(),
            q0.symbols()
        )));
    }
    let mut q = q0.clone();
    let mut last = None;
    for _ in 0..MAX_ROUNDS {
        let mut change = f64::INFINITY;
        for _ in 0..settings.max_fixed_point_iters {
            let ws = Workspace::new(p, &q);
            let next = update_ws(kind, p, &q, beta, &ws)?;
            change = next.sup_distance(&q);
            q = next;
            if change < settings.convergence_tol {
                break;
            }
        }

        let converged = change < settings.convergence_tol;
        if converged && !settings.polish {
            return StationaryPoint::evaluate(kind, p, q, beta);
        }
        let newton = solve_kkt(
            kind,
            p,
            &q,
            beta,
            None,
            Constraint::FixedBeta(beta),
            &NewtonOptions::default(),
        );
        let plain = StationaryPoint::evaluate(kind, p, q.clone(), beta)?;
        match newton {
            Ok(sol) if !converged || sol.q.sup_distance(&q) < POLISH_RADIUS => {
                let polished = StationaryPoint::evaluate(kind, p, sol.q, beta)?;
                if converged && plain.kkt_residual <= polished.kkt_residual {
                    return Ok(plain);
                }
                return Ok(polished);
            }
            _ if converged || plain.kkt_residual < KKT_ACCEPT => return Ok(plain),
            _ => last = Some(plain.kkt_residual),
        }
    }
    Err(Error::NonConvergence {
        residual: last.unwrap_or(f64::INFINITY),
    })
}

/// Newton solve at fixed `beta` without any fixed-point iterations. Follows
/// the branch through `q0` whether or not it is stable.
pub fn continue_at_beta(
    kind: ObjectiveKind,
    p: &JointDistribution,
    q0: &Quantizer,
    beta: f64,
) -> Result<StationaryPoint> {
    let sol = solve_kkt(
        kind,
        p,
        q0,
        beta,
        None,
        Constraint::FixedBeta(beta),
        &NewtonOptions::default(),
    )?;
    StationaryPoint::evaluate(kind, p, sol.q, beta)
}
