use serde::{Deserialize, Serialize};

use super::solve::{solve_constrained_seeded, solve_from_seeds, CurvePoint, Seed, SolverOptions};
use crate::anneal::{anneal, AnnealOutcome, AnnealSchedule, StationaryPoint};
use crate::error::{Error, Result};
use crate::prob::{JointDistribution, ObjectiveKind};

/// Grid and solver settings of [`build_curve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: ObjectiveKind,
    pub i0_min: f64,
    pub i0_max: f64,
    /// Number of equally spaced `I0` values, endpoints included.
    pub points: usize,
    pub solver: SolverOptions,
    /// Anneal first and seed every `I0` with the nearest point of each branch.
    pub anneal: Option<AnnealSchedule>,
    /// Allowed increase of `R` between consecutive points.
    pub tol_mono: f64,
    /// Canonical sup-norm distance between neighbours that starts a new branch id.
    pub max_jump: f64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        Self {
            kind: ObjectiveKind::InformationDistortion,
            i0_min: 0.001,
            i0_max: 0.1,
            points: 100,
            solver: SolverOptions::default(),
            anneal: Some(AnnealSchedule::default()),
            tol_mono: 1e-6,
            max_jump: 0.05,
        }
    }
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.i0_min > 0.0 && self.i0_min < self.i0_max && self.i0_max.is_finite()) {
            return bad(format!(
                "need 0 < i0_min < i0_max, got {} and {}",
                self.i0_min, self.i0_max
            ));
        }
        if self.points < 2 {
            return bad(format!("need at least 2 points, got {}", self.points));
        }
        if self.solver.classes == 0 {
            return bad("need at least one class".into());
        }
        if !(self.tol_mono >= 0.0 && self.max_jump > 0.0 && self.solver.tol_active > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(s) = &self.anneal {
            s.validate()?;
        }
        Ok(())
    }

    /// The `I0` grid.
    pub fn grid(&self) -> Vec<f64> {
        let h = (self.i0_max - self.i0_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.i0_max
                } else {
                    self.i0_min + h * i as f64
                }
            })
            .collect()
    }
}

/// An `I0` value at which no solution was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGap {
    pub i0: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Curve {
    /// Solved points in ascending `I0`.
    pub points: Vec<CurvePoint>,
    pub gaps: Vec<CurveGap>,
    pub anneal: Option<AnnealOutcome>,
}

/// For every annealed branch, the point whose information is closest to `i0`.
fn anneal_seeds(outcome: &AnnealOutcome, i0: f64) -> Vec<Seed> {
    outcome
        .branches
        .iter()
        .filter_map(|b| {
            b.points
                .iter()
                .filter(|sp| sp.information > 0.0)
                .min_by(|a, c| {
                    (a.information - i0)
                        .abs()
                        .total_cmp(&(c.information - i0).abs())
                })
        })
        .map(|sp: &StationaryPoint| Seed::from(sp))
        .collect()
}

/// Traces `R(I0)` over the grid of `spec`.
///
/// The grid is swept upward, each point seeded by its left neighbour, the
/// annealed branches and fresh starts; a downward pass then offers every
/// point its right neighbour as an extra start. Remaining increases of `R`
/// larger than `tol_mono` are re-solved with twice the restarts. Points
/// are assigned branch ids by continuity of the canonical quantizer.
pub fn build_curve(spec: &CurveSpec, p: &JointDistribution) -> Result<Curve> {
    spec.validate()?;
    let kind = spec.kind;
    let classes = spec.solver.classes;
    let outcome = match &spec.anneal {
        Some(schedule) if classes >= 2 => Some(anneal(kind, p, classes, schedule)?),
        _ => None,
    };
    let grid = spec.grid();
    let mut slots: Vec<Option<CurvePoint>> = vec![None; grid.len()];
    let mut reasons: Vec<Option<String>> = vec![None; grid.len()];

    let mut previous: Option<CurvePoint> = None;
    for (i, &i0) in grid.iter().enumerate() {
        let mut seeds = Vec::new();
        if let Some(prev) = &previous {
            seeds.push(Seed::from(prev));
        }
        if let Some(o) = &outcome {
            seeds.extend(anneal_seeds(o, i0));
        }
        match solve_constrained_seeded(kind, p, i0, seeds, &spec.solver) {
            Ok(cp) => {
                previous = Some(cp.clone());
                slots[i] = Some(cp);
            }
            Err(e @ (Error::NonConvergence { .. } | Error::InfeasibleI0 { .. })) => {
                reasons[i] = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
    }

    let no_restarts = SolverOptions {
        restarts: 0,
        ..spec.solver.clone()
    };
    for i in (0..grid.len().saturating_sub(1)).rev() {
        let Some(right) = slots[i + 1].clone() else {
            continue;
        };
        offer(
            kind,
            p,
            grid[i],
            &mut slots[i],
            vec![Seed::from(&right)],
            &no_restarts,
            true,
        );
    }

    let more = SolverOptions {
        restarts: 2 * spec.solver.restarts.max(4),
        seed: spec.solver.seed.wrapping_add(1),
        ..spec.solver.clone()
    };
    for _ in 0..3 {
        let mut changed = false;
        for i in 0..grid.len().saturating_sub(1) {
            let (Some(a), Some(b)) = (&slots[i], &slots[i + 1]) else {
                continue;
            };
            if b.r <= a.r + spec.tol_mono {
                continue;
            }
            let seeds = vec![Seed::from(b)];
            changed |= offer(kind, p, grid[i], &mut slots[i], seeds, &more, false);
        }
        if !changed {
            break;
        }
    }

    let mut points: Vec<CurvePoint> = Vec::new();
    let mut gaps = Vec::new();
    let mut branch = 0usize;
    let mut broken = false;
    for (i, slot) in slots.into_iter().enumerate() {
        let Some(mut cp) = slot else {
            gaps.push(CurveGap {
                i0: grid[i],
                reason: reasons[i].take().unwrap_or_else(|| "not solved".into()),
            });
            broken = true;
            continue;
        };
        if let Some(prev) = points.last() {
            if broken
                || cp.q.canonical_distance(&prev.q) > spec.max_jump
                || cp.q.signature() != prev.q.signature()
            {
                branch += 1;
            }
        }
        broken = false;
        cp.branch_id = branch;
        points.push(cp);
    }
    Ok(Curve {
        points,
        gaps,
        anneal: outcome,
    })
}

/// Re-solves at `i0` from `seeds` and keeps the result if it has larger `R`.
fn offer(
    kind: ObjectiveKind,
    p: &JointDistribution,
    i0: f64,
    slot: &mut Option<CurvePoint>,
    seeds: Vec<Seed>,
    opts: &SolverOptions,
    skip_fresh: bool,
) -> bool {
    let result = if skip_fresh {
        solve_from_seeds(kind, p, i0, &seeds, opts)
    } else {
        solve_constrained_seeded(kind, p, i0, seeds, opts).ok()
    };
    match (result, slot.as_ref()) {
        (Some(new), Some(old)) if new.r > old.r + 1e-12 => {
            *slot = Some(new);
            true
        }
        (Some(new), None) => {
            *slot = Some(new);
            true
        }
        _ => false,
    }
}
