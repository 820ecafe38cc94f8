//! Inclusion of an intersection of equal-radius balls in another ball.
//!
//! With `f_k(x) = ‖x − c_k‖² − R²` and `f(x) = ‖x − c‖² − r²`, the functions
//!
//! ```text
//! G_k = f_k − min(f, 0) + Σ_{i≠k} max(f_i, 0)        G = max_k G_k
//! ```
//!
//! are convex. When `d(c, C1) > R`, the set `C1 \ int(C0)` is nonempty
//! exactly when a global minimizer of `G` belongs to it. `G_k` is assembled
//! as `(f_k − f) + f⁺ + Σ_{i≠k} f_i⁺`; the difference `f_k − f` is affine.
//!
//! Indices of centers are zero-based throughout.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::convexfn::ConvexFn;
use crate::error::{Error, Result};
use crate::feasibility::{check_feasibility, ConstraintSet, FeasibilityVerdict};
use crate::geometry::{check_dims, dist, sq_dist, Ball, Halfspace, Vector};
use crate::minimize::{minimize_restarted, RestartSchedule, SolverConfig};

/// `C1`: closed balls of a common radius around each center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallIntersection {
    pub centers: Vec<Vector>,
    pub radius: f64,
}

impl BallIntersection {
    pub fn new(centers: Vec<Vector>, radius: f64) -> Result<Self> {
        let first = centers.first().ok_or_else(|| {
            Error::InvalidInput("ball intersection needs at least one center".into())
        })?;
        for c in &centers[1..] {
            check_dims(first.dim(), c.dim())?;
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(BallIntersection { centers, radius })
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn balls(&self) -> Vec<Ball> {
        self.centers
            .iter()
            .map(|c| Ball {
                center: c.clone(),
                radius: self.radius,
            })
            .collect()
    }

    /// `f_k(x)` for every center.
    pub fn residuals(&self, x: &Vector) -> Result<Vec<f64>> {
        let r2 = self.radius * self.radius;
        self.centers
            .iter()
            .map(|c| Ok(sq_dist(x, c)? - r2))
            .collect()
    }

    /// `max_k f_k(x) ≤ tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self
            .residuals(x)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            <= tol)
    }
}

/// `C0`: the closed ball `B(c, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterBall {
    pub center: Vector,
    pub radius: f64,
}

impl OuterBall {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        Ball::new(center.clone(), radius)?;
        Ok(OuterBall { center, radius })
    }
}

/// `G_k` for the zero-based center index `k`.
pub fn build_gk(bi: &BallIntersection, ob: &OuterBall, k: usize) -> Result<ConvexFn> {
    check_dims(bi.dim(), ob.center.dim())?;
    let ck = bi.centers.get(k).ok_or(Error::IndexOutOfRange {
        index: k,
        len: bi.len(),
    })?;
    let (big_r2, r2) = (bi.radius * bi.radius, ob.radius * ob.radius);

    // f_k − f = −2(c_k − c)ᵀx + ‖c_k‖² − ‖c‖² − R² + r²
    let diff = ck - &ob.center;
    let affine = ConvexFn::affine(
        diff.scale(-2.0),
        ck.sq_norm() - ob.center.sq_norm() - big_r2 + r2,
    );
    let mut terms = vec![
        affine,
        ConvexFn::positive_part(ConvexFn::ball_quad(ob.center.clone(), -r2)),
    ];
    terms.extend(
        bi.centers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, ci)| ConvexFn::positive_part(ConvexFn::ball_quad(ci.clone(), -big_r2))),
    );
    ConvexFn::sum(terms)
}

/// `G = max_k G_k`; the achieving index is reported by evaluation.
pub fn build_g(bi: &BallIntersection, ob: &OuterBall) -> Result<ConvexFn> {
    let terms = (0..bi.len())
        .map(|k| build_gk(bi, ob, k))
        .collect::<Result<Vec<_>>>()?;
    ConvexFn::max(terms)
}

/// A closed convex set with a closed-form projection.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexPiece {
    Ball(Ball),
    Halfspace(Halfspace),
}

impl ConvexPiece {
    fn dim(&self) -> usize {
        match self {
            ConvexPiece::Ball(b) => b.dim(),
            ConvexPiece::Halfspace(h) => h.dim(),
        }
    }

    fn project_raw(&self, x: &[f64], out: &mut [f64]) {
        match self {
            ConvexPiece::Ball(b) => b.project_raw(x, out),
            ConvexPiece::Halfspace(h) => h.project_raw(x, out),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub point: Vector,
    /// Full sweeps over all pieces.
    pub cycles: usize,
    pub converged: bool,
}

/// Euclidean projection of `y` onto an intersection of balls.
pub fn dykstra_project(balls: &[Ball], y: &Vector, iters: usize, tol: f64) -> Result<Projection> {
    let pieces: Vec<ConvexPiece> = balls.iter().cloned().map(ConvexPiece::Ball).collect();
    dykstra_project_pieces(&pieces, y, iters, tol)
}

/// Dykstra's alternating projections with correction terms.
///
/// Each sweep projects `x + p_i` onto piece `i` and stores the residual
/// back into `p_i`. Stops once a sweep moves neither the iterate nor the
/// corrections by more than `tol`.
pub fn dykstra_project_pieces(
    pieces: &[ConvexPiece],
    y: &Vector,
    iters: usize,
    tol: f64,
) -> Result<Projection> {
    let first = pieces
        .first()
        .ok_or_else(|| Error::InvalidInput("projection needs at least one set".into()))?;
    for p in pieces {
        check_dims(first.dim(), p.dim())?;
    }
    check_dims(first.dim(), y.dim())?;

    let n = y.dim();
    let mut x = y.as_slice().to_vec();
    let mut corrections = vec![vec![0.0; n]; pieces.len()];
    let mut z = vec![0.0; n];
    let mut next = vec![0.0; n];

    for cycle in 1..=iters.max(1) {
        let mut moved: f64 = 0.0;
        for (piece, p) in pieces.iter().zip(corrections.iter_mut()) {
            for ((zi, xi), pi) in z.iter_mut().zip(&x).zip(p.iter()) {
                *zi = xi + pi;
            }
            piece.project_raw(&z, &mut next);
            for i in 0..n {
                let p_new = z[i] - next[i];
                moved = moved.max((p_new - p[i]).abs()).max((next[i] - x[i]).abs());
                p[i] = p_new;
                x[i] = next[i];
            }
        }
        if moved <= tol {
            return Ok(Projection {
                point: Vector::from_raw(x),
                cycles: cycle,
                converged: true,
            });
        }
    }
    Ok(Projection {
        point: Vector::from_raw(x),
        cycles: iters.max(1),
        converged: false,
    })
}

pub(crate) const DYKSTRA_ITERS: usize = 100_000;
pub(crate) const DYKSTRA_TOL: f64 = 1e-12;

/// `d(c, C1) − R`, with `C1` known to be nonempty.
pub fn precondition_margin(bi: &BallIntersection, c: &Vector) -> Result<f64> {
    let proj = dykstra_project(&bi.balls(), c, DYKSTRA_ITERS, DYKSTRA_TOL)?;
    if !proj.converged {
        return Err(Error::NonConvergence {
            what: "Dykstra projection",
            iters: proj.cycles,
        });
    }
    Ok(dist(c, &proj.point)? - bi.radius)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InclusionVerdict {
    /// `C1 \ int(C0)` is nonempty; `C1` is not contained in the open ball.
    NonemptyDifference,
    /// `C1` lies in the interior of `C0`.
    Included,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub verdict: InclusionVerdict,
    pub r: f64,
    pub x_star: Vector,
    pub g_at_xstar: f64,
    pub residuals_fk: Vec<f64>,
    pub dist_xstar_to_c: f64,
    /// `max(max_k f_k(x*), r² − ‖x* − c‖²)`; non-positive on `C1 \ int(C0)`.
    pub membership_gap: f64,
    pub precondition_margin: f64,
    pub iters: usize,
    pub evals: usize,
}

/// A ball intersection and outer center, validated once for repeated radius queries.
#[derive(Clone, Debug)]
pub struct InclusionProblem {
    bi: BallIntersection,
    center: Vector,
    start: Vector,
    margin: f64,
    setup_iters: usize,
}

impl InclusionProblem {
    /// Certifies `C1 ≠ ∅` and `d(c, C1) > R + tol`.
    pub fn new(bi: &BallIntersection, center: &Vector, cfg: &SolverConfig) -> Result<Self> {
        check_dims(bi.dim(), center.dim())?;
        let cs = ConstraintSet::from_balls(&bi.balls())?;
        let feas = check_feasibility(&cs, &cs.default_start(), cfg)?;
        let start = match feas.verdict {
            FeasibilityVerdict::Feasible => feas.witness.expect("feasible reports carry a witness"),
            FeasibilityVerdict::Infeasible => {
                return Err(Error::EmptyIntersection {
                    g_tilde_min: feas.g_tilde_min,
                })
            }
            FeasibilityVerdict::Undetermined => {
                return Err(Error::InnerUndetermined(format!(
                    "emptiness of the ball intersection (merit minimum {:e})",
                    feas.g_tilde_min
                )))
            }
        };
        let margin = precondition_margin(bi, center)?;
        if margin <= cfg.tol {
            return Err(Error::PreconditionFailed { margin });
        }
        debug!("inclusion setup: start={start:?} margin={margin:e}");
        Ok(InclusionProblem {
            bi: bi.clone(),
            center: center.clone(),
            start,
            margin,
            setup_iters: feas.iters,
        })
    }

    pub fn intersection(&self) -> &BallIntersection {
        &self.bi
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// A point of `C1`.
    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn precondition_margin(&self) -> f64 {
        self.margin
    }

    pub fn setup_iters(&self) -> usize {
        self.setup_iters
    }

    /// Minimizes `G` for outer radius `r` and classifies the minimizer.
    ///
    /// `NonemptyDifference` when `x*` lies in `C1 \ int(C0)` within `tol`.
    /// `Included` when it misses that set by more than `10·tol` and
    /// `G(x*) > 0`; a positive minimum is what an empty difference forces.
    /// Anything else is `Undetermined`.
    pub fn check(&self, r: f64, cfg: &SolverConfig) -> Result<InclusionReport> {
        let ob = OuterBall::new(self.center.clone(), r)?;
        let g = build_g(&self.bi, &ob)?;
        let run = minimize_restarted(
            &g,
            &self.start,
            self.bi.radius,
            cfg,
            &RestartSchedule::default(),
        )?;
        let x_star = run.x_best;

        let residuals_fk = self.bi.residuals(&x_star)?;
        let max_fk = residuals_fk
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let d2 = sq_dist(&x_star, &self.center)?;
        let gap = max_fk.max(r * r - d2);

        let verdict = if gap <= cfg.tol {
            InclusionVerdict::NonemptyDifference
        } else if gap > 10.0 * cfg.tol && run.f_best > 0.0 {
            InclusionVerdict::Included
        } else {
            InclusionVerdict::Undetermined
        };
        debug!(
            "inclusion r={r}: verdict={verdict:?} G*={:e} gap={gap:e}",
            run.f_best
        );
        Ok(InclusionReport {
            verdict,
            r,
            x_star,
            g_at_xstar: run.f_best,
            residuals_fk,
            dist_xstar_to_c: d2.sqrt(),
            membership_gap: gap,
            precondition_margin: self.margin,
            iters: run.iters,
            evals: run.evals,
        })
    }
}

/// Decides whether `C1 \ int(C0)` is empty.
///
/// Fails with `EmptyIntersection` when `C1 = ∅` and with
/// `PreconditionFailed` when `d(c, C1) ≤ R + tol`, where the minimizer
/// carries no information.
pub fn check_inclusion(
    bi: &BallIntersection,
    ob: &OuterBall,
    cfg: &SolverConfig,
) -> Result<InclusionReport> {
    let problem = InclusionProblem::new(bi, &ob.center, cfg)?;
    let mut report = problem.check(ob.radius, cfg)?;
    report.iters += problem.setup_iters;
    Ok(report)
}
