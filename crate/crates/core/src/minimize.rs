//! Subgradient minimization of [`ConvexFn`] expressions.
//!
//! Subgradient steps are not descent steps, so the best iterate seen so far
//! is what gets reported. Runs are deterministic.

use log::{debug, trace};
use serde::{Deserialize, Serialize};

use crate::convexfn::ConvexFn;
use crate::error::{Error, Result};
use crate::geometry::{check_dims, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// `α = (f(x) − target) / ‖g‖²`; stops once `f(x) ≤ target + tol`.
    PolyakWithTarget { target: f64 },
    /// `α = c0 / √(k + 1)` along the normalized subgradient.
    Diminishing { c0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub step_rule: StepRule,
    /// Stop once `f_best` improved by less than `tol` over this many iterations.
    pub stall_iters: usize,
    /// Keep `f_best` after every iteration in [`MinimizeResult::trace`].
    #[serde(default)]
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 50_000,
            tol: 1e-8,
            step_rule: StepRule::Diminishing { c0: 1.0 },
            stall_iters: 2_000,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_step_rule(&self, step_rule: StepRule) -> Self {
        SolverConfig {
            step_rule,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        match self.step_rule {
            StepRule::Diminishing { c0 } if !(c0 > 0.0 && c0.is_finite()) => Err(
                Error::InvalidInput(format!("c0 must be positive, got {c0}")),
            ),
            StepRule::PolyakWithTarget { target } if !target.is_finite() => {
                Err(Error::InvalidInput("Polyak target must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    ZeroSubgradient,
    Stalled,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeResult {
    pub x_best: Vector,
    pub f_best: f64,
    pub iters: usize,
    pub converged: bool,
    pub evals: usize,
    pub stop: StopReason,
    /// `f_best` after each iteration, filled only when `record_trace` is set.
    pub trace: Vec<f64>,
}

pub fn minimize(f: &ConvexFn, x0: &Vector, cfg: &SolverConfig) -> Result<MinimizeResult> {
    check_dims(f.dim(), x0.dim())?;
    cfg.validate()?;

    let n = x0.dim();
    let mut x = x0.as_slice().to_vec();
    let mut g = vec![0.0; n];
    let mut x_best = x.clone();
    let mut f_best = f64::INFINITY;
    let mut trace = Vec::new();

    let mut stall_ref = f64::INFINITY;
    let mut stall_iter = 0;
    let mut stop = StopReason::IterationLimit;
    let mut iters = 0;

    for k in 0..cfg.max_iters {
        iters = k + 1;
        let (fx, _) = f.eval_raw(&x, &mut g);
        if !fx.is_finite() {
            return Err(Error::NonFinite { iter: k });
        }
        if fx < f_best {
            f_best = fx;
            x_best.copy_from_slice(&x);
        }
        if cfg.record_trace {
            trace.push(f_best);
        }

        if let StepRule::PolyakWithTarget { target } = cfg.step_rule {
            if fx <= target + cfg.tol {
                stop = StopReason::TargetReached;
                break;
            }
        }
        let g2: f64 = g.iter().map(|gi| gi * gi).sum();
        if g2 == 0.0 {
            stop = StopReason::ZeroSubgradient;
            break;
        }

        if f_best < stall_ref - cfg.tol {
            stall_ref = f_best;
            stall_iter = k;
        } else if k - stall_iter >= cfg.stall_iters {
            stop = StopReason::Stalled;
            break;
        }

        let alpha = match cfg.step_rule {
            StepRule::PolyakWithTarget { target } => (fx - target) / g2,
            StepRule::Diminishing { c0 } => c0 / ((k + 1) as f64).sqrt() / g2.sqrt(),
        };
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= alpha * gi;
        }
    }

    trace!("minimize: stop={stop:?} iters={iters} f_best={f_best:e}");
    Ok(MinimizeResult {
        x_best: Vector::from_raw(x_best),
        f_best,
        iters,
        converged: stop != StopReason::IterationLimit,
        evals: iters,
        stop,
        trace,
    })
}

/// Geometric schedule of diminishing-step restarts.
///
/// Phase `p` runs [`StepRule::Diminishing`] with `c0 · shrink^p` from the
/// best point of the previous phase. The iteration budget `max_iters` is
/// split evenly across phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSchedule {
    pub phases: usize,
    pub shrink: f64,
}

impl Default for RestartSchedule {
    fn default() -> Self {
        RestartSchedule {
            phases: 10,
            shrink: 0.1,
        }
    }
}

/// Diminishing-step minimization restarted on a shrinking step scale.
///
/// A single diminishing run ends with steps of size `c0 / √K`; restarting
/// with a smaller `c0` from the best point refines the minimizer to far
/// below that scale without giving up the long reach of the first phase.
pub fn minimize_restarted(
    f: &ConvexFn,
    x0: &Vector,
    c0: f64,
    cfg: &SolverConfig,
    schedule: &RestartSchedule,
) -> Result<MinimizeResult> {
    if schedule.phases == 0 || !(schedule.shrink > 0.0 && schedule.shrink <= 1.0) {
        return Err(Error::InvalidInput(
            "restart schedule needs phases ≥ 1 and shrink in (0, 1]".into(),
        ));
    }
    let per_phase = (cfg.max_iters / schedule.phases).max(1);
    let mut scale = c0;
    let mut total: Option<MinimizeResult> = None;
    for phase in 0..schedule.phases {
        let start = total.as_ref().map_or(x0, |r| &r.x_best);
        let phase_cfg = SolverConfig {
            max_iters: per_phase,
            step_rule: StepRule::Diminishing { c0: scale },
            ..cfg.clone()
        };
        let run = minimize(f, start, &phase_cfg)?;
        debug!(
            "restart phase {phase}: c0={scale:e} f_best={:e} stop={:?}",
            run.f_best, run.stop
        );
        let zero_subgradient = run.stop == StopReason::ZeroSubgradient;
        total = Some(match total {
            None => run,
            Some(prev) => merge(prev, run),
        });
        if zero_subgradient {
            break;
        }
        scale *= schedule.shrink;
    }
    Ok(total.expect("at least one phase"))
}

fn merge(prev: MinimizeResult, next: MinimizeResult) -> MinimizeResult {
    let mut trace = prev.trace;
    let offset = trace.last().copied().unwrap_or(f64::INFINITY);
    trace.extend(next.trace.iter().map(|f| f.min(offset)));
    let (x_best, f_best) = if next.f_best < prev.f_best {
        (next.x_best, next.f_best)
    } else {
        (prev.x_best, prev.f_best)
    };
    MinimizeResult {
        x_best,
        f_best,
        iters: prev.iters + next.iters,
        converged: next.converged,
        evals: prev.evals + next.evals,
        stop: next.stop,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn abs_fn() -> ConvexFn {
        ConvexFn::max(vec![
            ConvexFn::affine(v(&[1.0]), 0.0),
            ConvexFn::affine(v(&[-1.0]), 0.0),
        ])
        .unwrap()
    }

    fn two_disk_merit() -> ConvexFn {
        let balls = [
            Ball::new(v(&[0.0, 0.0]), 1.0).unwrap(),
            Ball::new(v(&[3.0, 0.0]), 1.0).unwrap(),
        ];
        ConvexFn::sum(
            balls
                .iter()
                .map(|b| ConvexFn::positive_part(ConvexFn::ball(b)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn polyak_on_absolute_value() {
        let cfg =
            SolverConfig::default().with_step_rule(StepRule::PolyakWithTarget { target: 0.0 });
        let r = minimize(&abs_fn(), &v(&[5.0]), &cfg).unwrap();
        assert!(r.x_best[0].abs() <= 1e-8);
        assert!(r.converged);
    }

    /// Dense scan of the one-dimensional reduction `(t² − 1)⁺ + ((3 − t)² − 1)⁺`.
    fn scanned_two_disk_minimum() -> (f64, f64) {
        let h = |t: f64| (t * t - 1.0).max(0.0) + ((3.0 - t) * (3.0 - t) - 1.0).max(0.0);
        (0..=400_000)
            .map(|i| -1.0 + 5.0 * i as f64 / 400_000.0)
            .map(|t| (t, h(t)))
            .fold(
                (0.0, f64::INFINITY),
                |best, p| if p.1 < best.1 { p } else { best },
            )
    }

    #[test]
    fn diminishing_on_disjoint_disk_merit() {
        let (t_scan, f_scan) = scanned_two_disk_minimum();
        assert!((t_scan - 1.5).abs() < 1e-4 && (f_scan - 2.5).abs() < 1e-8);

        let r = minimize(&two_disk_merit(), &v(&[0.0, 0.0]), &SolverConfig::default()).unwrap();
        assert!((r.f_best - f_scan).abs() <= 1e-4, "f_best = {}", r.f_best);
        assert!((r.x_best[0] - 1.5).abs() < 1e-2 && r.x_best[1].abs() < 1e-2);
    }

    #[test]
    fn diminishing_on_smooth_quadratic() {
        let f = ConvexFn::ball_quad(v(&[1.0, 2.0]), 0.0);
        let r = minimize(&f, &v(&[0.0, 0.0]), &SolverConfig::default()).unwrap();
        assert!(r.f_best <= 1e-6, "f_best = {}", r.f_best);
        assert!((r.x_best[0] - 1.0).abs() < 1e-3 && (r.x_best[1] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn restarts_reach_analytic_minimizer() {
        for center in [[1.0, 2.0], [-3.0, 0.5], [0.0, 0.0]] {
            let f = ConvexFn::ball_quad(v(&center), 0.0);
            let r = minimize_restarted(
                &f,
                &v(&[4.0, -4.0]),
                1.0,
                &SolverConfig::default(),
                &RestartSchedule::default(),
            )
            .unwrap();
            let err = (&r.x_best - &v(&center)).norm();
            assert!(err < 1e-4, "error {err}");
        }
    }

    #[test]
    fn zero_subgradient_returns_immediately() {
        let f = ConvexFn::ball_quad(v(&[1.0, 2.0]), 0.0);
        let r = minimize(&f, &v(&[1.0, 2.0]), &SolverConfig::default()).unwrap();
        assert_eq!(r.iters, 1);
        assert!(r.converged);
        assert_eq!(r.stop, StopReason::ZeroSubgradient);
    }

    #[test]
    fn non_finite_value_aborts() {
        let f = ConvexFn::affine(v(&[1e308]), 0.0);
        let err = minimize(&f, &v(&[1e10]), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { iter: 0 }));
    }

    #[test]
    fn rejects_bad_config_and_dimension() {
        let f = abs_fn();
        let bad = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(minimize(&f, &v(&[1.0]), &bad).is_err());
        let bad = SolverConfig::default().with_step_rule(StepRule::Diminishing { c0: -1.0 });
        assert!(minimize(&f, &v(&[1.0]), &bad).is_err());
        assert!(minimize(&f, &v(&[1.0, 2.0]), &SolverConfig::default()).is_err());
    }

    #[test]
    fn best_value_trace_is_monotone_and_consistent() {
        let cfg = SolverConfig {
            record_trace: true,
            ..SolverConfig::default()
        };
        let f = two_disk_merit();
        let r = minimize(&f, &v(&[-4.0, 3.0]), &cfg).unwrap();
        assert_eq!(r.trace.len(), r.iters);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.f_best, f.value(&r.x_best).unwrap());

        let r = minimize_restarted(&f, &v(&[-4.0, 3.0]), 2.0, &cfg, &RestartSchedule::default())
            .unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.f_best, f.value(&r.x_best).unwrap());
    }

    #[test]
    fn polyak_with_exact_target_does_not_undershoot() {
        // min of |x − 2| + 1 is 1
        let f = ConvexFn::max(vec![
            ConvexFn::affine(v(&[1.0]), -1.0),
            ConvexFn::affine(v(&[-1.0]), 3.0),
        ])
        .unwrap();
        let cfg =
            SolverConfig::default().with_step_rule(StepRule::PolyakWithTarget { target: 1.0 });
        for x0 in [-7.0, 0.0, 2.0, 9.5] {
            let r = minimize(&f, &v(&[x0]), &cfg).unwrap();
            assert!(r.f_best >= 1.0 - cfg.tol);
            assert!(r.f_best <= 1.0 + cfg.tol);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let f = two_disk_merit();
        let a = minimize(&f, &v(&[0.3, 0.7]), &SolverConfig::default()).unwrap();
        let b = minimize(&f, &v(&[0.3, 0.7]), &SolverConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
