use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::point::{continue_at_beta, solve_at_beta, SolverSettings, StationaryPoint};
use crate::error::{Error, Result};
use crate::prob::{JointDistribution, ObjectiveKind, Quantizer, SymmetrySignature};
use crate::spectral::{
    classify_stationary_point, detect_bifurcations, BifurcationEvent, BifurcationKind,
    DEFAULT_TOL_EIG,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_max: f64,
    /// Initial (and largest) beta increment.
    pub step: f64,
    /// Increments are halved down to this before giving up or declaring a jump.
    pub step_min: f64,
    /// Size (sup-norm) of the random tangent perturbation applied before each solve.
    pub perturbation: f64,
    pub max_fixed_point_iters: usize,
    pub convergence_tol: f64,
    pub rng_seed: u64,
    /// Largest sup-norm change of `q` between consecutive points of one branch.
    pub max_jump: f64,
    pub tol_eig: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            beta_start: 0.0,
            beta_max: 2.0,
            step: 0.01,
            step_min: 1e-4,
            perturbation: 1e-4,
            max_fixed_point_iters: 5000,
            convergence_tol: 1e-10,
            rng_seed: 0,
            max_jump: 0.05,
            tol_eig: DEFAULT_TOL_EIG,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        if !(self.beta_start >= 0.0 && self.beta_start < self.beta_max) {
            return bad("need 0 <= beta_start < beta_max");
        }
        if !(self.step > self.step_min && self.step_min > 0.0) {
            return bad("need step > step_min > 0");
        }
        if self.perturbation.is_nan() || self.perturbation < 0.0 {
            return bad("perturbation must be non-negative");
        }
        if !(self.convergence_tol > 0.0 && self.tol_eig > 0.0 && self.max_jump > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_fixed_point_iters == 0 {
            return bad("max_fixed_point_iters must be positive");
        }
        Ok(())
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            convergence_tol: self.convergence_tol,
            max_fixed_point_iters: self.max_fixed_point_iters,
            polish: true,
        }
    }
}

/// How a branch was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Provenance {
    UniformRoot,
    /// Entered after a symmetry-breaking eigenvalue crossing on `parent`.
    PitchforkChild {
        parent: usize,
    },
    /// Entered after the parent branch was lost without a detected crossing.
    Jump {
        parent: usize,
    },
    /// Traced by fixed-information solves rather than by annealing.
    ConstrainedRecovery,
}

/// Stationary points on one connected solution branch, in arc order.
#[derive(Debug, Clone)]
pub struct Branch {
    pub id: usize,
    pub points: Vec<StationaryPoint>,
    pub signature: SymmetrySignature,
    pub provenance: Provenance,
}

impl Branch {
    pub fn beta_range(&self) -> Option<(f64, f64)> {
        let betas = self.points.iter().map(|p| p.beta);
        let lo = betas.clone().fold(f64::INFINITY, f64::min);
        let hi = betas.fold(f64::NEG_INFINITY, f64::max);
        (!self.points.is_empty()).then_some((lo, hi))
    }
}

#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
}

impl AnnealOutcome {
    pub fn points(&self) -> impl Iterator<Item = (&Branch, &StationaryPoint)> {
        self.branches
            .iter()
            .flat_map(|b| b.points.iter().map(move |p| (b, p)))
    }
}

/// Random direction with zero column sums, scaled to sup-norm `size`.
/// The bottleneck objective is flat along `q_{nu k} = a_nu`, so for it
/// row means are removed as well.
fn tangent_direction(
    rng: &mut ChaCha8Rng,
    classes: usize,
    symbols: usize,
    double_center: bool,
    size: f64,
) -> DMatrix<f64> {
    let mut v = DMatrix::<f64>::from_fn(classes, symbols, |_, _| StandardNormal.sample(rng));
    for mut col in v.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    if double_center {
        for mut row in v.row_iter_mut() {
            let m = row.mean();
            row.add_scalar_mut(-m);
        }
    }
    let amax = v.amax();
    if amax > 0.0 {
        v *= size / amax;
    }
    v
}

pub(crate) fn perturb(q: &Quantizer, v: &DMatrix<f64>) -> Quantizer {
    let m = q.matrix();
    let moved = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let base = m[(r, c)];
        (base + v[(r, c)]).max(0.5 * base)
    });
    Quantizer::normalized(moved).unwrap_or_else(|_| q.clone())
}

/// Anneals in beta from the uniform quantizer.
///
/// At each step the previous solution is perturbed along a seeded random
/// tangent direction and re-solved. When the solution changes symmetry or
/// moves by more than `max_jump`, the step is halved down to `step_min`;
/// a change that persists at `step_min` ends the branch and starts a new
/// one. Finished branches are scanned for bifurcations.
pub fn anneal(
    kind: ObjectiveKind,
    p: &JointDistribution,
    classes: usize,
    schedule: &AnnealSchedule,
) -> Result<AnnealOutcome> {
    schedule.validate()?;
    if classes == 0 {
        return Err(Error::InvalidSpec("need at least one class".into()));
    }
    let symbols = p.y_size();
    let settings = schedule.solver_settings();
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.rng_seed);
    let double_center = kind == ObjectiveKind::InformationBottleneck;
    let classify = |mut sp: StationaryPoint| -> Result<StationaryPoint> {
        if classes >= 2 {
            sp.classification = Some(classify_stationary_point(kind, p, &sp, schedule.tol_eig)?);
        }
        Ok(sp)
    };

    let start = {
        let v = tangent_direction(
            &mut rng,
            classes,
            symbols,
            double_center,
            schedule.perturbation,
        );
        let q0 = perturb(&Quantizer::uniform(classes, symbols), &v);
        classify(solve_at_beta(kind, p, &q0, schedule.beta_start, &settings)?)?
    };
    let mut branches = vec![Branch {
        id: 0,
        signature: start.q.signature(),
        points: vec![start],
        provenance: Provenance::UniformRoot,
    }];

    let mut beta = schedule.beta_start;
    let mut h = schedule.step;
    while beta < schedule.beta_max {
        let target = (beta + h).min(schedule.beta_max);
        let current = branches.last().expect("at least one branch");
        let prev = current.points.last().expect("branches are never empty");
        let v = tangent_direction(
            &mut rng,
            classes,
            symbols,
            double_center,
            schedule.perturbation,
        );
        let q0 = perturb(&prev.q, &v);

        let sp = match solve_at_beta(kind, p, &q0, target, &settings) {
            Ok(sp) => sp,
            Err(Error::NonConvergence { residual }) => {
                if h <= schedule.step_min {
                    return Err(Error::NonConvergence { residual });
                }
                h = (h * 0.5).max(schedule.step_min);
                continue;
            }
            Err(e) => return Err(e),
        };

        let jumped =
            sp.q.signature() != current.signature || sp.q.sup_distance(&prev.q) > schedule.max_jump;
        if jumped && h > schedule.step_min {
            h = (h * 0.5).max(schedule.step_min);
            continue;
        }

        if jumped {
            let parent = current.id;
            let prev_q = prev.q.clone();
            let signature = current.signature.clone();
            if let Ok(ext) = continue_at_beta(kind, p, &prev_q, target) {
                if ext.q.signature() == signature
                    && ext.q.sup_distance(&prev_q) <= schedule.max_jump
                {
                    let ext = classify(ext)?;
                    branches.last_mut().expect("non-empty").points.push(ext);
                }
            }
            let sp = classify(sp)?;
            branches.push(Branch {
                id: branches.len(),
                signature: sp.q.signature(),
                points: vec![sp],
                provenance: Provenance::Jump { parent },
            });
        } else {
            let sp = classify(sp)?;
            branches.last_mut().expect("non-empty").points.push(sp);
        }
        beta = target;
        h = (h * 2.0).min(schedule.step);
    }

    let mut events = Vec::new();
    if classes >= 2 {
        for b in 0..branches.len() {
            let found = detect_bifurcations(kind, p, &branches[b], schedule.tol_eig)?;
            for mut event in found {
                if event.kind == BifurcationKind::PitchforkLike {
                    if let Some(child) = branches
                        .iter()
                        .position(|c| c.provenance == Provenance::Jump { parent: b })
                    {
                        event.children.push(child);
                        branches[child].provenance = Provenance::PitchforkChild { parent: b };
                    }
                }
                events.push(event);
            }
        }
    }
    events.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    Ok(AnnealOutcome { branches, events })
}
