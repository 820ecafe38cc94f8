//! Feasibility of an intersection of convex sub-level sets.
//!
//! The sets `S_k = {x : g_k(x) ≤ 0}` intersect exactly when the merit
//! function `Σ g_k⁺` has global minimum zero, and then every global
//! minimizer lies in the intersection. The check minimizes the merit
//! function and reads the verdict off the minimum.
//!
//! `tol` is absolute. Constraints should be scaled by the caller so that
//! values of order one are meaningful.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::convexfn::ConvexFn;
use crate::error::{Error, Result};
use crate::geometry::{check_dims, Ball, Vector};
use crate::minimize::{
    minimize, minimize_restarted, MinimizeResult, RestartSchedule, SolverConfig, StepRule,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<ConvexFn>,
    dim: usize,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<ConvexFn>) -> Result<Self> {
        let dim = constraints
            .first()
            .ok_or_else(|| {
                Error::InvalidInput("constraint set needs at least one constraint".into())
            })?
            .dim();
        for g in &constraints[1..] {
            check_dims(dim, g.dim())?;
        }
        Ok(ConstraintSet { constraints, dim })
    }

    pub fn from_balls(balls: &[Ball]) -> Result<Self> {
        ConstraintSet::new(balls.iter().map(ConvexFn::ball).collect())
    }

    pub fn constraints(&self) -> &[ConvexFn] {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// `g_k(x)` for every constraint.
    pub fn residuals(&self, x: &Vector) -> Result<Vec<f64>> {
        self.constraints.iter().map(|g| g.value(x)).collect()
    }

    /// Centroid of the ball centers when every constraint is a ball, else the origin.
    pub fn default_start(&self) -> Vector {
        let mut sum = vec![0.0; self.dim];
        for g in &self.constraints {
            match g {
                ConvexFn::BallQuad { center, .. } => {
                    for (s, c) in sum.iter_mut().zip(center.as_slice()) {
                        *s += c;
                    }
                }
                _ => return Vector::zeros(self.dim),
            }
        }
        let m = self.constraints.len() as f64;
        Vector::from_raw(sum.into_iter().map(|s| s / m).collect())
    }

    /// Length scale used for diminishing steps: the largest ball radius, at least one.
    fn step_scale(&self) -> f64 {
        self.constraints
            .iter()
            .filter_map(|g| match g {
                ConvexFn::BallQuad { offset, .. } if *offset < 0.0 => Some((-offset).sqrt()),
                _ => None,
            })
            .fold(1.0, f64::max)
    }
}

/// `Σ_k max(g_k, 0)`.
pub fn build_g_tilde(cs: &ConstraintSet) -> ConvexFn {
    ConvexFn::Sum(
        cs.constraints
            .iter()
            .cloned()
            .map(ConvexFn::positive_part)
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityVerdict {
    Feasible,
    Infeasible,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub verdict: FeasibilityVerdict,
    /// A point of the intersection, present only for `Feasible`.
    pub witness: Option<Vector>,
    /// Best point found by the minimizer.
    pub best_point: Vector,
    /// `g_k(best_point)`.
    pub residuals: Vec<f64>,
    pub g_tilde_min: f64,
    pub iters: usize,
    pub evals: usize,
}

/// Minimizes the merit function and classifies its minimum.
///
/// A Polyak run with target zero certifies the feasible case quickly. If it
/// does not reach the target, restarted diminishing steps estimate the
/// positive minimum. Minima in the band `(tol, 10·tol]` are reported as
/// `Undetermined`, as is a run that never stalled. `cfg.step_rule` is not
/// used; the limits and tolerances are.
pub fn check_feasibility(
    cs: &ConstraintSet,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<FeasibilityReport> {
    check_dims(cs.dim, x0.dim())?;
    let merit = build_g_tilde(cs);

    let polyak = minimize(
        &merit,
        x0,
        &cfg.with_step_rule(StepRule::PolyakWithTarget { target: 0.0 }),
    )?;
    debug!(
        "feasibility polyak: f_best={:e} iters={}",
        polyak.f_best, polyak.iters
    );
    let (run, iters, evals) = if polyak.f_best <= cfg.tol {
        let (i, e) = (polyak.iters, polyak.evals);
        (polyak, i, e)
    } else {
        let refined = minimize_restarted(
            &merit,
            &polyak.x_best,
            cs.step_scale(),
            cfg,
            &RestartSchedule::default(),
        )?;
        debug!(
            "feasibility refine: f_best={:e} iters={}",
            refined.f_best, refined.iters
        );
        let (i, e) = (polyak.iters + refined.iters, polyak.evals + refined.evals);
        if refined.f_best < polyak.f_best {
            (refined, i, e)
        } else {
            // keep the better point but the refinement's stop status
            let converged = refined.converged;
            (
                MinimizeResult {
                    converged,
                    ..polyak
                },
                i,
                e,
            )
        }
    };

    let verdict = if run.f_best <= cfg.tol {
        FeasibilityVerdict::Feasible
    } else if run.f_best > 10.0 * cfg.tol && run.converged {
        FeasibilityVerdict::Infeasible
    } else {
        FeasibilityVerdict::Undetermined
    };
    let residuals = cs.residuals(&run.x_best)?;
    Ok(FeasibilityReport {
        verdict,
        witness: (verdict == FeasibilityVerdict::Feasible).then(|| run.x_best.clone()),
        best_point: run.x_best,
        residuals,
        g_tilde_min: run.f_best,
        iters,
        evals,
    })
}
