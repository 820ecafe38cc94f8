//! Farthest point of a ball intersection from an outer center, by bisection
//! on the outer radius.
//!
//! For `x0 ∈ C1` every point of `C1` lies within `2R` of `x0`, so the
//! threshold radius `r*` is bracketed by `[R, 2R + ‖x0 − c‖]`. Each step
//! asks the inclusion test whether `C1 \ int B(c, mid)` is empty.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Vector};
use crate::inclusion::{precondition_margin, BallIntersection, InclusionProblem, InclusionVerdict};
use crate::minimize::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    /// Target precision on `r*`.
    pub eps: f64,
    pub inner: SolverConfig,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            eps: 1e-4,
            inner: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarthestReport {
    /// Final bracket midpoint.
    pub r_star: f64,
    /// Minimizer from the last step whose difference set was nonempty.
    pub x_witness: Vector,
    /// `‖x_witness − c‖`, a second lower bound on the true maximum.
    pub witness_distance: f64,
    pub bisection_steps: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Bracket before the first step.
    pub initial_r_lo: f64,
    pub initial_r_hi: f64,
    pub total_inner_iters: usize,
}

/// `(R, 2R + ‖x0 − c‖)`.
pub fn bracket(
    bi: &BallIntersection,
    c: &Vector,
    x0_in_c1: &Vector,
    tol: f64,
) -> Result<(f64, f64)> {
    if !bi.contains(x0_in_c1, tol)? {
        return Err(Error::InvalidInput(
            "bracket start point is not in the ball intersection".into(),
        ));
    }
    let margin = precondition_margin(bi, c)?;
    if margin <= tol {
        return Err(Error::PreconditionFailed { margin });
    }
    let r = bi.radius;
    Ok((r, 2.0 * r + dist(x0_in_c1, c)?))
}

/// Upper bound on the number of halvings needed to shrink `width` to `2·eps`.
pub fn step_bound(width: f64, eps: f64) -> usize {
    (width / eps).log2().ceil().max(0.0) as usize
}

pub fn solve_farthest(
    bi: &BallIntersection,
    c: &Vector,
    cfg: &BisectionConfig,
) -> Result<FarthestReport> {
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "eps must be positive, got {}",
            cfg.eps
        )));
    }
    let problem = InclusionProblem::new(bi, c, &cfg.inner)?;
    let (initial_lo, initial_hi) = bracket(bi, c, problem.start(), cfg.inner.tol)?;
    let (mut lo, mut hi) = (initial_lo, initial_hi);
    let mut total_inner_iters = problem.setup_iters();
    let mut witness = None;
    let mut steps = 0;

    while hi - lo > 2.0 * cfg.eps {
        let mid = 0.5 * (lo + hi);
        let report = problem.check(mid, &cfg.inner)?;
        total_inner_iters += report.iters;
        steps += 1;
        debug!(
            "bisection step {steps}: r={mid} verdict={:?}",
            report.verdict
        );
        match report.verdict {
            InclusionVerdict::NonemptyDifference => {
                lo = mid;
                witness = Some(report.x_star);
            }
            InclusionVerdict::Included => hi = mid,
            InclusionVerdict::Undetermined => {
                return Err(Error::InnerUndetermined(format!(
                    "inclusion at r = {mid} (membership gap {:e}, G(x*) = {:e})",
                    report.membership_gap, report.g_at_xstar
                )))
            }
        }
    }

    let x_witness = match witness {
        Some(x) => x,
        None => {
            let report = problem.check(lo, &cfg.inner)?;
            total_inner_iters += report.iters;
            if report.verdict != InclusionVerdict::NonemptyDifference {
                return Err(Error::InnerUndetermined(format!(
                    "no witness at the lower bracket r = {lo}"
                )));
            }
            report.x_star
        }
    };
    let witness_distance = dist(&x_witness, c)?;
    let r_star = 0.5 * (lo + hi);
    info!("farthest: r* = {r_star} after {steps} steps, witness distance {witness_distance}");
    Ok(FarthestReport {
        r_star,
        x_witness,
        witness_distance,
        bisection_steps: steps,
        r_lo: lo,
        r_hi: hi,
        initial_r_lo: initial_lo,
        initial_r_hi: initial_hi,
        total_inner_iters,
    })
}
