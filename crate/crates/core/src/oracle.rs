//! Brute-force ground truth for small dimensions, and randomized
//! falsification checks for the geometric facts the inclusion test relies on.
//!
//! Every check draws trial `i` from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`, so results do not depend on evaluation order. Dimensions
//! cycle through 2, 3 and 5.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::ConstraintSet;
use crate::geometry::{check_dims, dot, sq_dist_raw, Vector};
use crate::inclusion::{dykstra_project, BallIntersection, DYKSTRA_ITERS, DYKSTRA_TOL};

pub const GRID_POINT_LIMIT: u128 = 100_000_000;

/// Slack on strict inequalities, relative to the magnitudes involved.
pub const CHECK_SLACK: f64 = 1e-12;

pub const CHECK_DIMS: [usize; 3] = [2, 3, 5];

/// Regular grid `lower + j·step` inside the box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vector,
    pub upper: Vector,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lower: Vector, upper: Vector, step: f64) -> Result<Self> {
        check_dims(lower.dim(), upper.dim())?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if lower
            .as_slice()
            .iter()
            .zip(upper.as_slice())
            .any(|(l, u)| l >= u)
        {
            return Err(Error::InvalidInput(
                "grid lower corner must be below the upper corner".into(),
            ));
        }
        let grid = GridSpec { lower, upper, step };
        let points = grid.point_count();
        if points > GRID_POINT_LIMIT {
            return Err(Error::GridTooLarge {
                points,
                limit: GRID_POINT_LIMIT,
            });
        }
        Ok(grid)
    }

    /// Bounding box of the first ball clipped by the others.
    pub fn around(bi: &BallIntersection, step: f64) -> Result<Self> {
        let n = bi.dim();
        let r = bi.radius;
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        for c in &bi.centers {
            for i in 0..n {
                lo[i] = lo[i].max(c[i] - r);
                hi[i] = hi[i].min(c[i] + r);
            }
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::EmptySample);
        }
        // keep a nondegenerate box when the balls only touch
        for i in 0..n {
            if hi[i] - lo[i] < step {
                hi[i] = lo[i] + step;
            }
        }
        GridSpec::new(Vector::new(lo)?, Vector::new(hi)?, step)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    fn counts(&self) -> Vec<u64> {
        self.lower
            .as_slice()
            .iter()
            .zip(self.upper.as_slice())
            .map(|(l, u)| ((u - l) / self.step + 1e-9).floor() as u64 + 1)
            .collect()
    }

    pub fn point_count(&self) -> u128 {
        self.counts().iter().map(|&c| c as u128).product()
    }

    /// Calls `f` on every grid point, last coordinate fastest.
    pub fn for_each_point(&self, mut f: impl FnMut(&[f64])) {
        let counts = self.counts();
        let lower = self.lower.as_slice();
        let n = counts.len();
        let mut idx = vec![0u64; n];
        let mut x = lower.to_vec();
        loop {
            f(&x);
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < counts[i] {
                    x[i] = lower[i] + idx[i] as f64 * self.step;
                    break;
                }
                idx[i] = 0;
                x[i] = lower[i];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFeasibility {
    pub feasible: bool,
    /// Grid point with the smallest `max_k g_k`, present when that is ≤ 0.
    pub witness: Option<Vector>,
    /// `−max_k g_k` at the witness.
    pub depth: Option<f64>,
    pub min_g_tilde: f64,
    pub argmin_g_tilde: Vector,
}

/// Exhaustive scan of the merit function and of the constraint maximum.
pub fn grid_feasible(cs: &ConstraintSet, grid: &GridSpec) -> Result<GridFeasibility> {
    check_dims(cs.dim(), grid.dim())?;
    let gs = cs.constraints();
    let mut min_merit = (f64::INFINITY, Vec::new());
    let mut deepest = (f64::INFINITY, Vec::new());
    grid.for_each_point(|x| {
        let (mut merit, mut worst) = (0.0, f64::NEG_INFINITY);
        for g in gs {
            let v = g.value_raw(x);
            merit += v.max(0.0);
            worst = worst.max(v);
        }
        if merit < min_merit.0 {
            min_merit = (merit, x.to_vec());
        }
        if worst < deepest.0 {
            deepest = (worst, x.to_vec());
        }
    });
    let feasible = deepest.0 <= 0.0;
    Ok(GridFeasibility {
        feasible,
        witness: feasible.then(|| Vector::from_raw(deepest.1)),
        depth: feasible.then_some(-deepest.0),
        min_g_tilde: min_merit.0,
        argmin_g_tilde: Vector::from_raw(min_merit.1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMaxDistance {
    pub r_max: f64,
    pub arg: Vector,
    pub points_inside: u64,
}

/// Largest `‖x − c‖` over grid points of the ball intersection.
pub fn grid_max_distance(
    bi: &BallIntersection,
    c: &Vector,
    grid: &GridSpec,
) -> Result<GridMaxDistance> {
    check_dims(bi.dim(), c.dim())?;
    check_dims(bi.dim(), grid.dim())?;
    let r2 = bi.radius * bi.radius;
    let centers: Vec<&[f64]> = bi.centers.iter().map(Vector::as_slice).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut inside = 0u64;
    grid.for_each_point(|x| {
        if centers.iter().all(|ck| sq_dist_raw(x, ck) <= r2) {
            inside += 1;
            let d = sq_dist_raw(x, c.as_slice());
            if d > best.0 {
                best = (d, x.to_vec());
            }
        }
    });
    if inside == 0 {
        return Err(Error::EmptySample);
    }
    Ok(GridMaxDistance {
        r_max: best.0.sqrt(),
        arg: Vector::from_raw(best.1),
        points_inside: inside,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub dim: usize,
    pub points: BTreeMap<String, Vec<f64>>,
    /// Normalized quantity that should have been positive.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub trials: u64,
    pub seed: u64,
    pub passed: bool,
    /// Smallest normalized margin seen over all trials.
    pub worst_margin: f64,
    pub counterexample: Option<Counterexample>,
}

struct Trial {
    rng: ChaCha8Rng,
    dim: usize,
}

impl Trial {
    fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Trial {
            rng,
            dim: CHECK_DIMS[(index % CHECK_DIMS.len() as u64) as usize],
        }
    }

    fn unit(&mut self) -> Vec<f64> {
        loop {
            let d: Vec<f64> = (0..self.dim)
                .map(|_| self.rng.sample(StandardNormal))
                .collect();
            let norm = dot(&d, &d).sqrt();
            if norm > 1e-9 {
                return d.into_iter().map(|c| c / norm).collect();
            }
        }
    }

    fn point(&mut self, half_width: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|_| self.rng.random_range(-half_width..half_width))
            .collect()
    }

    /// Uniform in the open ball `B(center, r)`.
    fn in_ball(&mut self, center: &[f64], r: f64) -> Vec<f64> {
        let u = self.unit();
        let rho = r * self
            .rng
            .random_range(0.0f64..1.0)
            .powf(1.0 / self.dim as f64);
        center.iter().zip(&u).map(|(c, ui)| c + rho * ui).collect()
    }
}

fn add(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Runs `trial` for every index and stops at the first negative margin.
fn run_check(
    name: &str,
    trials: u64,
    seed: u64,
    mut trial: impl FnMut(&mut Trial) -> Result<(f64, BTreeMap<String, Vec<f64>>)>,
) -> Result<CheckReport> {
    let mut worst = f64::INFINITY;
    for i in 0..trials {
        let mut t = Trial::new(seed, i);
        let (margin, points) = trial(&mut t)?;
        worst = worst.min(margin);
        if margin <= -CHECK_SLACK {
            return Ok(CheckReport {
                check: name.into(),
                trials: i + 1,
                seed,
                passed: false,
                worst_margin: worst,
                counterexample: Some(Counterexample {
                    trial: i,
                    dim: t.dim,
                    points,
                    value: margin,
                }),
            });
        }
    }
    Ok(CheckReport {
        check: name.into(),
        trials,
        seed,
        passed: true,
        worst_margin: worst,
        counterexample: None,
    })
}

/// `(x − b)ᵀ(a − b) / (1 + ‖a − b‖²)`.
fn separation_margin(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let ab = sub(a, b);
    dot(&sub(x, b), &ab) / (1.0 + dot(&ab, &ab))
}

/// For `b` outside the open ball `B(a, r)` and `x` inside it,
/// `(x − b)ᵀ(a − b) > 0`.
pub fn check_outside_point_separation(trials: u64, seed: u64) -> Result<CheckReport> {
    run_check("outside_point_separation", trials, seed, |t| {
        let a = t.point(5.0);
        let r = t.rng.random_range(0.1..3.0);
        // a tenth of the trials put b on the sphere itself
        let stretch = if t.rng.random_bool(0.1) {
            1.0
        } else {
            1.0 + t.rng.random_range(0.0..2.0)
        };
        let u = t.unit();
        let b = add(&a, r * stretch, &u);
        let x = t.in_ball(&a, r);
        let m = separation_margin(&a, &b, &x);
        Ok((
            m,
            BTreeMap::from([
                ("a".into(), a),
                ("b".into(), b),
                ("x".into(), x),
                ("r".into(), vec![r]),
            ]),
        ))
    })
}

/// Centers within `0.8·R` of a common point, so the intersection contains it.
fn random_intersection(t: &mut Trial) -> Result<(BallIntersection, Vec<f64>)> {
    let p = t.point(3.0);
    let radius = t.rng.random_range(0.2..2.0);
    let m = t.rng.random_range(1..=3);
    let mut centers = Vec::with_capacity(m);
    for _ in 0..m {
        let u = t.unit();
        let rho = radius * t.rng.random_range(0.0..0.8);
        centers.push(Vector::new(add(&p, rho, &u))?);
    }
    Ok((BallIntersection::new(centers, radius)?, p))
}

/// Rejection sampling from the first ball; falls back to `fallback`.
fn sample_intersection(t: &mut Trial, bi: &BallIntersection, fallback: &[f64]) -> Vec<f64> {
    let r2 = bi.radius * bi.radius;
    for _ in 0..10_000 {
        let x = t.in_ball(bi.centers[0].as_slice(), bi.radius);
        if bi
            .centers
            .iter()
            .all(|c| sq_dist_raw(&x, c.as_slice()) <= r2)
        {
            return x;
        }
    }
    fallback.to_vec()
}

/// For `x ∈ C1` and `d(y, C1) > R`, `(x − y)ᵀ(c^k − y) > 0` for every center.
///
/// `y` is built as `P(z) + R(1 + τ)·n` with `n` the outward normal at the
/// projection of a random outside point `z`, so its distance to `C1` is
/// known exactly; Dykstra confirms it.
pub fn check_far_point_separation(trials: u64, seed: u64) -> Result<CheckReport> {
    run_check("far_point_separation", trials, seed, |t| {
        let (bi, p) = random_intersection(t)?;
        let r = bi.radius;
        let u = t.unit();
        let z = Vector::new(add(
            bi.centers[0].as_slice(),
            r * t.rng.random_range(1.05..3.0),
            &u,
        ))?;
        let proj = dykstra_project(&bi.balls(), &z, DYKSTRA_ITERS, DYKSTRA_TOL)?.point;
        let normal = sub(z.as_slice(), proj.as_slice());
        let len = dot(&normal, &normal).sqrt();
        let tau = t.rng.random_range(1e-3..1.0);
        let y = add(proj.as_slice(), r * (1.0 + tau) / len, &normal);
        let y_proj = dykstra_project(
            &bi.balls(),
            &Vector::new(y.clone())?,
            DYKSTRA_ITERS,
            DYKSTRA_TOL,
        )?
        .point;
        let d = sq_dist_raw(&y, y_proj.as_slice()).sqrt();
        if d <= r {
            return Err(Error::InvalidInput(format!(
                "constructed point at distance {d} is not farther than {r}"
            )));
        }
        let x = sample_intersection(t, &bi, &p);
        let margin = bi
            .centers
            .iter()
            .map(|ck| separation_margin(ck.as_slice(), &y, &x))
            .fold(f64::INFINITY, f64::min);
        let mut points: BTreeMap<String, Vec<f64>> = bi
            .centers
            .iter()
            .enumerate()
            .map(|(k, c)| (format!("c{k}"), c.as_slice().to_vec()))
            .collect();
        points.insert("x".into(), x);
        points.insert("y".into(), y);
        points.insert("radius".into(), vec![r]);
        Ok((margin, points))
    })
}

pub const RAY_PARAMS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];

/// With `c1`, `c2` equidistant from `y` and `z` no closer to `c1` than to
/// `c2`, every point `y + t(z − y)`, `t ≥ 0`, stays no closer to `c1`.
///
/// `c2` is the mirror image of `c1` across a random hyperplane through `y`;
/// `z` is mirrored too when it starts on the wrong side.
pub fn check_equidistant_ray_dominance(trials: u64, seed: u64) -> Result<CheckReport> {
    run_check("equidistant_ray_dominance", trials, seed, |t| {
        let y = t.point(3.0);
        let c1 = t.point(3.0);
        let w = t.unit();
        let reflect = |p: &[f64]| add(p, -2.0 * dot(&w, &sub(p, &y)), &w);
        let c2 = reflect(&c1);
        let mut z = t.point(3.0);
        if sq_dist_raw(&z, &c1) < sq_dist_raw(&z, &c2) {
            z = reflect(&z);
        }
        let extra = t.rng.random_range(0.0..10.0);
        let dir = sub(&z, &y);
        let margin = RAY_PARAMS
            .iter()
            .chain(std::iter::once(&extra))
            .map(|&s| {
                let q = add(&y, s, &dir);
                let (d1, d2) = (sq_dist_raw(&q, &c1), sq_dist_raw(&q, &c2));
                (d1 - d2) / (1.0 + d1 + d2)
            })
            .fold(f64::INFINITY, f64::min);
        Ok((
            margin,
            BTreeMap::from([
                ("y".into(), y),
                ("z".into(), z),
                ("c1".into(), c1),
                ("c2".into(), c2),
            ]),
        ))
    })
}

const SEGMENT_SAMPLES: usize = 8;
const SEGMENT_HALVINGS: i32 = 20;

/// Margin by which the best center of the tie group stays farthest along
/// `y + t·v`, `t ∈ (0, δ)`, maximized over `δ ∈ {2⁻¹, …, 2⁻²⁰}`.
fn persistence_margin(y: &[f64], centers: &[Vec<f64>], ties: usize, v: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for h in 1..=SEGMENT_HALVINGS {
        let delta = 0.5f64.powi(h);
        let ts: Vec<f64> = (1..=SEGMENT_SAMPLES)
            .map(|j| delta * j as f64 / (SEGMENT_SAMPLES + 1) as f64)
            .collect();
        for k in 0..ties {
            let margin = ts
                .iter()
                .map(|&t| {
                    let q = add(y, t, v);
                    let dk = sq_dist_raw(&q, &centers[k]);
                    let others = centers
                        .iter()
                        .map(|c| sq_dist_raw(&q, c))
                        .fold(f64::NEG_INFINITY, f64::max);
                    (dk - others) / (1.0 + dk)
                })
                .fold(f64::INFINITY, f64::min);
            best = best.max(margin);
        }
        if best >= 0.0 {
            break;
        }
    }
    best
}

/// When the first `p` centers are tied as farthest from `y`, moving a short
/// way along any direction keeps one of them farthest.
pub fn check_farthest_center_persistence(trials: u64, seed: u64) -> Result<CheckReport> {
    run_check("farthest_center_persistence", trials, seed, |t| {
        let y = t.point(3.0);
        let rho = t.rng.random_range(0.5..3.0);
        let m = t.rng.random_range(2..=5);
        let ties = t.rng.random_range(1..=m);
        let centers: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let u = t.unit();
                let s = if i < ties {
                    1.0
                } else {
                    t.rng.random_range(0.0..0.95)
                };
                add(&y, rho * s, &u)
            })
            .collect();
        let v = t.unit();
        let margin = persistence_margin(&y, &centers, ties, &v);
        let mut points: BTreeMap<String, Vec<f64>> = centers
            .iter()
            .enumerate()
            .map(|(k, c)| (format!("c{k}"), c.clone()))
            .collect();
        points.insert("y".into(), y);
        points.insert("v".into(), v);
        points.insert("ties".into(), vec![ties as f64]);
        Ok((margin, points))
    })
}
