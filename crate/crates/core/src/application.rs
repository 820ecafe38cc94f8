//! Bounding the farthest distance over a convex region `S` from inside.
//!
//! If a ball intersection `C1` sits inside `S` and every point of `S` is
//! within `δ` of `C1`, the maximum distance `V_s` from `c` over `S`
//! satisfies `V_c ≤ V_s ≤ V_c + δ`, where `V_c` is the maximum over `C1`.
//! A point of `∂S` realizing the sandwich is obtained by maximizing the
//! linear function `(x*_c − c)ᵀx` over `S`.
//!
//! Both hypotheses are spot-checked by sampling. That is a guard against
//! gross mistakes, not a proof.

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::convexfn::ConvexFn;
use crate::error::{Error, Result};
use crate::farthest::{solve_farthest, BisectionConfig};
use crate::feasibility::{check_feasibility, ConstraintSet, FeasibilityVerdict};
use crate::geometry::{check_dims, dist, dot, Ball, Halfspace, Vector};
use crate::inclusion::{
    dykstra_project_pieces, BallIntersection, ConvexPiece, DYKSTRA_ITERS, DYKSTRA_TOL,
};
use crate::minimize::SolverConfig;

/// Slack for membership and distance checks on sampled points.
pub const SPOT_TOL: f64 = 1e-6;

const ASCENT_ITERS: usize = 2_000;
const MAX_CANDIDATE_DIM: usize = 10;

/// Intersection of halfspaces and balls; assumed nonempty and bounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexRegion {
    pub halfspaces: Vec<Halfspace>,
    pub balls: Vec<Ball>,
    pub dim: usize,
}

impl ConvexRegion {
    pub fn new(halfspaces: Vec<Halfspace>, balls: Vec<Ball>) -> Result<Self> {
        let dim = halfspaces
            .first()
            .map(Halfspace::dim)
            .or_else(|| balls.first().map(Ball::dim))
            .ok_or_else(|| Error::InvalidInput("region needs at least one constraint".into()))?;
        for h in &halfspaces {
            check_dims(dim, h.dim())?;
        }
        for b in &balls {
            check_dims(dim, b.dim())?;
        }
        Ok(ConvexRegion {
            halfspaces,
            balls,
            dim,
        })
    }

    pub fn from_intersection(bi: &BallIntersection) -> Self {
        ConvexRegion {
            halfspaces: Vec::new(),
            balls: bi.balls(),
            dim: bi.dim(),
        }
    }

    /// The axis-aligned box `[lower, upper]`.
    pub fn cube(lower: &[f64], upper: &[f64]) -> Result<Self> {
        check_dims(lower.len(), upper.len())?;
        let n = lower.len();
        let mut hs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            hs.push(Halfspace::new(Vector::new(e.clone())?, upper[i])?);
            e[i] = -1.0;
            hs.push(Halfspace::new(Vector::new(e)?, -lower[i])?);
        }
        ConvexRegion::new(hs, Vec::new())
    }

    pub fn pieces(&self) -> Vec<ConvexPiece> {
        self.halfspaces
            .iter()
            .cloned()
            .map(ConvexPiece::Halfspace)
            .chain(self.balls.iter().cloned().map(ConvexPiece::Ball))
            .collect()
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet> {
        ConstraintSet::new(
            self.halfspaces
                .iter()
                .map(ConvexFn::halfspace)
                .chain(self.balls.iter().map(ConvexFn::ball))
                .collect(),
        )
    }

    /// Largest constraint violation: `aᵀx − b` for halfspaces, `‖x − c‖ − r` for balls.
    pub fn violation(&self, x: &Vector) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for h in &self.halfspaces {
            worst = worst.max(h.excess(x)? / h.a.norm());
        }
        for b in &self.balls {
            worst = worst.max(dist(x, &b.center)? - b.radius);
        }
        Ok(worst)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.violation(x)? <= tol)
    }

    pub fn project(&self, y: &Vector) -> Result<Vector> {
        let proj = dykstra_project_pieces(&self.pieces(), y, DYKSTRA_ITERS, DYKSTRA_TOL)?;
        if !proj.converged {
            return Err(Error::NonConvergence {
                what: "Dykstra projection",
                iters: proj.cycles,
            });
        }
        Ok(proj.point)
    }

    /// Parameter interval `{t : x + t·d ∈ S}`, `None` when the line misses `S`.
    pub fn chord(&self, x: &[f64], d: &[f64]) -> Result<Option<(f64, f64)>> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for h in &self.halfspaces {
            let a = h.a.as_slice();
            let (ad, slack) = (dot(a, d), h.b - dot(a, x));
            if ad > 0.0 {
                hi = hi.min(slack / ad);
            } else if ad < 0.0 {
                lo = lo.max(slack / ad);
            } else if slack < 0.0 {
                return Ok(None);
            }
        }
        for b in &self.balls {
            let xc: Vec<f64> = x
                .iter()
                .zip(b.center.as_slice())
                .map(|(p, q)| p - q)
                .collect();
            let (qa, qb, qc) = (dot(d, d), dot(d, &xc), dot(&xc, &xc) - b.radius * b.radius);
            let disc = qb * qb - qa * qc;
            if disc < 0.0 {
                return Ok(None);
            }
            let s = disc.sqrt();
            lo = lo.max((-qb - s) / qa);
            hi = hi.min((-qb + s) / qa);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInput("region is unbounded".into()));
        }
        Ok((lo <= hi).then_some((lo, hi)))
    }

    /// Longest chord through `x` along the axes and `extra`.
    fn diameter_estimate(&self, x: &Vector, extra: &[f64]) -> Result<f64> {
        let n = self.dim;
        let mut best: f64 = 0.0;
        let mut dirs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        dirs.push(extra.to_vec());
        for d in &dirs {
            if let Some((lo, hi)) = self.chord(x.as_slice(), d)? {
                best = best.max((hi - lo) * dot(d, d).sqrt());
            }
        }
        Ok(if best > 0.0 { best } else { 1.0 })
    }

    /// A point of the region, from the feasibility check.
    pub fn feasible_point(&self, cfg: &SolverConfig) -> Result<Vector> {
        let cs = self.constraint_set()?;
        let report = check_feasibility(&cs, &cs.default_start(), cfg)?;
        match report.verdict {
            FeasibilityVerdict::Feasible => {
                Ok(report.witness.expect("feasible reports carry a witness"))
            }
            _ => Err(Error::InvalidInput(format!(
                "region is empty or its feasibility is undetermined (merit minimum {:e})",
                report.g_tilde_min
            ))),
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&d, &d).sqrt();
        if norm > 1e-12 {
            return d.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Hit-and-run walk inside `region` started at `start`.
pub fn hit_and_run(
    region: &ConvexRegion,
    start: &Vector,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vector>> {
    check_dims(region.dim, start.dim())?;
    let mut x = start.as_slice().to_vec();
    let mut out = Vec::with_capacity(count);
    let mut misses = 0;
    while out.len() < count {
        let d = random_direction(rng, region.dim);
        let Some((lo, hi)) = region.chord(&x, &d)? else {
            misses += 1;
            if misses > 1000 * (count + 1) {
                return Err(Error::NonConvergence {
                    what: "hit-and-run",
                    iters: misses,
                });
            }
            continue;
        };
        let t = if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        };
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += t * di;
        }
        out.push(Vector::from_raw(x.clone()));
    }
    Ok(out)
}

/// Projections onto `region` of far points along the axes and, in low
/// dimension, along every sign pattern. These land on vertices and extreme
/// faces that uniform sampling tends to miss.
pub fn extreme_candidates(region: &ConvexRegion, start: &Vector) -> Result<Vec<Vector>> {
    let n = region.dim;
    let reach = 100.0 * region.diameter_estimate(start, &vec![1.0; n])?;
    let mut dirs = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    if n > 1 && n <= MAX_CANDIDATE_DIM {
        for mask in 0..(1u32 << n) {
            let scale = 1.0 / (n as f64).sqrt();
            dirs.push(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { -scale } else { scale })
                    .collect(),
            );
        }
    }
    dirs.iter()
        .map(|d| {
            let far = start.axpy(reach, &Vector::from_raw(d.clone()))?;
            region.project(&far)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppConfig {
    pub bisection: BisectionConfig,
    /// Hit-and-run samples per hypothesis check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            bisection: BisectionConfig::default(),
            samples: 1_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x_hat: Vector,
    /// `(x*_c − c)ᵀ(x̂ − x*_c)`.
    pub objective: f64,
    pub iterations: usize,
    /// Best objective after each ascent step.
    pub trace: Vec<f64>,
}

/// Maximizes `(x*_c − c)ᵀx` over the region by projected ascent.
///
/// Steps of length `D/√(k+1)` along the fixed direction, `D` being a chord
/// length estimate of the region, each followed by a Dykstra projection.
/// The ascent starts from the projection of `x*_c`.
pub fn extract_boundary_point(
    region: &ConvexRegion,
    x_star_c: &Vector,
    c: &Vector,
) -> Result<BoundaryPoint> {
    check_dims(region.dim, x_star_c.dim())?;
    let dir = x_star_c.checked_sub(c)?;
    let len = dir.norm();
    if len <= 1e-12 * (1.0 + c.norm()) {
        return Err(Error::UndefinedDirection);
    }
    let u = dir.scale(1.0 / len);
    let objective = |x: &Vector| dot(dir.as_slice(), (x - x_star_c).as_slice());

    let mut x = region.project(x_star_c)?;
    let diameter = region.diameter_estimate(&x, u.as_slice())?;
    let mut best = (objective(&x), x.clone());
    let mut trace = Vec::with_capacity(ASCENT_ITERS);
    for k in 0..ASCENT_ITERS {
        let step = diameter / ((k + 1) as f64).sqrt();
        x = region.project(&x.axpy(step, &u)?)?;
        let val = objective(&x);
        if val > best.0 {
            best = (val, x.clone());
        }
        trace.push(best.0);
    }
    debug!("boundary point: objective {:e} at {:?}", best.0, best.1);
    Ok(BoundaryPoint {
        x_hat: best.1,
        objective: best.0,
        iterations: ASCENT_ITERS,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppBoundReport {
    /// Farthest distance from `c` over the ball intersection.
    pub v_c: f64,
    pub x_star_c: Vector,
    pub x_hat: Vector,
    pub dist_x_hat: f64,
    pub delta: f64,
    /// `V_c − s ≤ ‖x̂ − c‖ ≤ V_c + δ + s` with `s = sandwich_slack`.
    pub sandwich_holds: bool,
    /// `2·eps + tol`, the resolution of `V_c`.
    pub sandwich_slack: f64,
    pub samples_checked: usize,
    pub bisection_steps: usize,
}

/// Spot-checks both hypotheses, computes `V_c` and extracts `x̂`.
///
/// Fails with `HypothesisViolated` carrying the offending point when a
/// sampled point of `C1` leaves the region or a sampled point of the region
/// is farther than `δ` from `C1`.
pub fn bound_max_distance(
    region: &ConvexRegion,
    bi: &BallIntersection,
    c: &Vector,
    delta: f64,
    cfg: &AppConfig,
) -> Result<AppBoundReport> {
    check_dims(region.dim, bi.dim())?;
    check_dims(region.dim, c.dim())?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    let inner = &cfg.bisection.inner;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let inner_region = ConvexRegion::from_intersection(bi);
    let inner_start = inner_region.feasible_point(inner)?;
    let mut inner_points = extreme_candidates(&inner_region, &inner_start)?;
    inner_points.extend(hit_and_run(
        &inner_region,
        &inner_start,
        cfg.samples,
        &mut rng,
    )?);
    for x in &inner_points {
        let v = region.violation(x)?;
        if v > SPOT_TOL {
            return Err(Error::HypothesisViolated {
                hypothesis: "ball intersection contained in region",
                counterexample: x.clone(),
                distance: v,
            });
        }
    }

    let outer_start = region.feasible_point(inner)?;
    let mut outer_points = extreme_candidates(region, &outer_start)?;
    outer_points.extend(hit_and_run(region, &outer_start, cfg.samples, &mut rng)?);
    for x in &outer_points {
        let p = inner_region.project(x)?;
        let d = dist(x, &p)?;
        if d > delta + SPOT_TOL {
            return Err(Error::HypothesisViolated {
                hypothesis: "region within delta of ball intersection",
                counterexample: x.clone(),
                distance: d,
            });
        }
    }
    let samples_checked = inner_points.len() + outer_points.len();

    let farthest = solve_farthest(bi, c, &cfg.bisection)?;
    let boundary = extract_boundary_point(region, &farthest.x_witness, c)?;
    let dist_x_hat = dist(&boundary.x_hat, c)?;
    let v_c = farthest.r_star;
    let slack = 2.0 * cfg.bisection.eps + inner.tol;
    let sandwich_holds = v_c - slack <= dist_x_hat && dist_x_hat <= v_c + delta + slack;
    info!("appbound: V_c = {v_c}, |x_hat - c| = {dist_x_hat}, sandwich {sandwich_holds}");
    Ok(AppBoundReport {
        v_c,
        x_star_c: farthest.x_witness,
        x_hat: boundary.x_hat,
        dist_x_hat,
        delta,
        sandwich_holds,
        sandwich_slack: slack,
        samples_checked,
        bisection_steps: farthest.bisection_steps,
    })
}
