//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Run with `cargo test -p hullscope --test acceptance`.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hullscope::application::{bound_max_distance, AppConfig, ConvexRegion};
use hullscope::cli::ProblemFile;
use hullscope::convexfn::ConvexFn;
use hullscope::error::Error;
use hullscope::farthest::{solve_farthest, step_bound, BisectionConfig};
use hullscope::feasibility::{build_g_tilde, check_feasibility, ConstraintSet, FeasibilityVerdict};
use hullscope::geometry::{Ball, Vector};
use hullscope::inclusion::{
    build_g, build_gk, check_inclusion, precondition_margin, BallIntersection, InclusionVerdict,
    OuterBall,
};
use hullscope::minimize::SolverConfig;
use hullscope::oracle::{
    check_equidistant_ray_dominance, check_far_point_separation, check_farthest_center_persistence,
    check_outside_point_separation, grid_feasible, GridSpec,
};

const FIXTURES: [&str; 8] = [
    "disjoint-disks",
    "overlapping-disks",
    "single-disk-far-c",
    "lens-far-c",
    "c-inside",
    "square-and-disk",
    "big-square",
    "disk-self",
];

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn fixture(name: &str) -> ProblemFile {
    ProblemFile::parse(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn run(id: usize, name: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let took = start.elapsed();
    let in_time = limit.is_none_or(|l| took <= l);
    let passed = out.passed && in_time;
    let budget = limit
        .map(|l| format!(" / {:.0}s", l.as_secs_f64()))
        .unwrap_or_default();
    println!(
        "{} [{id}] {name} ({:.2}s{budget}): {}{}",
        if passed { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        out.detail,
        if in_time { "" } else { " [over time budget]" }
    );
    passed
}

/// Lower bound on the minimum of `Σ (‖x − c_k‖² − r_k²)⁺` over the box.
///
/// Every box point is within `ρ = h√n/2` of a grid point `p`, and each term
/// changes by at most `2(‖p − c_k‖ + ρ)ρ` inside that cell.
fn merit_lower_bound(balls: &[Ball], grid: &GridSpec) -> f64 {
    let rho = grid.step * (grid.dim() as f64).sqrt() / 2.0;
    let mut lb = f64::INFINITY;
    grid.for_each_point(|p| {
        let mut merit = 0.0;
        let mut lip = 0.0;
        for b in balls {
            let d: f64 = p
                .iter()
                .zip(b.center.as_slice())
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
                .sqrt();
            merit += (d * d - b.radius * b.radius).max(0.0);
            lip += 2.0 * (d + rho);
        }
        lb = lb.min(merit - lip * rho);
    });
    lb
}

fn feasibility_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let cfg = SolverConfig::default();
    let grid = GridSpec::new(v(&[-2.5, -2.5]), v(&[2.5, 2.5]), 1e-2).unwrap();
    let (mut compared, mut mismatches, mut feasible) = (0, Vec::new(), 0);
    for i in 0..200 {
        let m = rng.random_range(2..=3);
        let balls: Vec<Ball> = (0..m)
            .map(|_| {
                let c = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
                Ball::new(c, rng.random_range(0.3..1.5)).unwrap()
            })
            .collect();
        let cs = ConstraintSet::from_balls(&balls).unwrap();
        let oracle = grid_feasible(&cs, &grid).unwrap();
        let margin = if oracle.feasible {
            oracle.depth.unwrap()
        } else {
            merit_lower_bound(&balls, &grid)
        };
        if margin <= 1e-4 {
            continue;
        }
        compared += 1;
        let report = check_feasibility(&cs, &cs.default_start(), &cfg).unwrap();
        let expected = if oracle.feasible {
            FeasibilityVerdict::Feasible
        } else {
            FeasibilityVerdict::Infeasible
        };
        feasible += oracle.feasible as usize;
        if report.verdict != expected {
            mismatches.push(format!(
                "#{i}: {:?} vs oracle {:?} (margin {margin:.2e})",
                report.verdict, expected
            ));
        }
    }
    outcome(
        mismatches.is_empty() && compared > 0,
        format!("{compared}/200 decisive ({feasible} feasible), mismatches {mismatches:?}"),
    )
}

fn disjoint_disks_value() -> Outcome {
    let cs = fixture("disjoint-disks").constraint_set().unwrap();
    let r = check_feasibility(&cs, &v(&[0.0, 0.0]), &SolverConfig::default()).unwrap();
    let ok = r.verdict == FeasibilityVerdict::Infeasible && (r.g_tilde_min - 2.5).abs() <= 1e-3;
    outcome(
        ok,
        format!("{:?}, merit minimum {}", r.verdict, r.g_tilde_min),
    )
}

/// `(r_lo, r_hi)` with `r_lo ≤ r* ≤ r_hi` from one grid pass.
///
/// `r_lo` is the farthest grid point of `C1`. `r_hi` adds `ρ` to the
/// farthest grid point of `C1` inflated by `ρ`, since every point of `C1`
/// has such a grid point within `ρ`.
fn farthest_bounds(bi: &BallIntersection, c: &[f64], step: f64) -> Option<(f64, f64)> {
    let rho = step * 2f64.sqrt() / 2.0;
    let r = bi.radius;
    let grid = GridSpec::around(bi, step).ok()?;
    let inflated = GridSpec::new(
        grid.lower.checked_sub(&v(&[rho, rho])).unwrap(),
        grid.upper.checked_add(&v(&[rho, rho])).unwrap(),
        step,
    )
    .unwrap();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    inflated.for_each_point(|p| {
        let worst = bi
            .centers
            .iter()
            .map(|ck| ((p[0] - ck[0]).powi(2) + (p[1] - ck[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
        if worst <= r {
            lo = lo.max(d);
        }
        if worst <= r + rho {
            hi = hi.max(d + rho);
        }
    });
    lo.is_finite().then_some((lo, hi))
}

fn inclusion_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_602);
    let cfg = SolverConfig::default();
    let (mut compared, mut drawn, mut nonempty) = (0, 0, 0);
    let mut mismatches = Vec::new();
    while drawn < 100 {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let radius = rng.random_range(0.5..1.5);
        let m = rng.random_range(1..=3);
        let centers: Vec<Vector> = (0..m)
            .map(|_| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                let s = radius * rng.random_range(0.0..0.8);
                v(&[p[0] + s * a.cos(), p[1] + s * a.sin()])
            })
            .collect();
        let bi = BallIntersection::new(centers, radius).unwrap();
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let dist = rng.random_range(1.0..6.0);
        let c = [p[0] + dist * a.cos(), p[1] + dist * a.sin()];
        if precondition_margin(&bi, &v(&c)).unwrap() <= 0.1 {
            continue;
        }
        drawn += 1;
        let (lo, hi) =
            farthest_bounds(&bi, &c, 2e-3).expect("constructed intersections are nonempty");
        let r = lo + rng.random_range(-0.5..0.5);
        let (expected, margin) = if r < lo {
            (InclusionVerdict::NonemptyDifference, lo - r)
        } else {
            (InclusionVerdict::Included, r - hi)
        };
        if margin <= 1e-3 || r <= 0.0 {
            continue;
        }
        compared += 1;
        nonempty += (expected == InclusionVerdict::NonemptyDifference) as usize;
        let report = check_inclusion(&bi, &OuterBall::new(v(&c), r).unwrap(), &cfg).unwrap();
        if report.verdict != expected {
            mismatches.push(format!(
                "#{drawn}: {:?} vs oracle {expected:?} (margin {margin:.2e})",
                report.verdict
            ));
        }
    }
    outcome(
        mismatches.is_empty() && compared > 0,
        format!("{compared}/100 decisive ({nonempty} nonempty), mismatches {mismatches:?}"),
    )
}

fn farthest_values() -> Outcome {
    let cfg = BisectionConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, expect) in [("single-disk-far-c", 6.0), ("lens-far-c", 4.0)] {
        let p = fixture(name);
        let start = Instant::now();
        let r = solve_farthest(
            &p.ball_intersection().unwrap(),
            &p.outer_center().unwrap(),
            &cfg,
        )
        .unwrap();
        let took = start.elapsed();
        let bound = step_bound(r.initial_r_hi - r.initial_r_lo, cfg.eps);
        ok &= (r.r_star - expect).abs() <= 2e-4
            && r.bisection_steps <= bound
            && took < Duration::from_secs(10);
        detail.push(format!(
            "{name}: r* = {:.6}, {} steps (bound {bound}), {:.2}s",
            r.r_star,
            r.bisection_steps,
            took.as_secs_f64()
        ));
    }
    outcome(ok, detail.join("; "))
}

fn falsification_checks() -> Outcome {
    let reports = [
        check_outside_point_separation(100_000, 0xA5).unwrap(),
        check_far_point_separation(10_000, 0xA6).unwrap(),
        check_equidistant_ray_dominance(10_000, 0xA7).unwrap(),
        check_farthest_center_persistence(10_000, 0xA8).unwrap(),
    ];
    let ok = reports.iter().all(|r| r.passed);
    let detail = reports
        .iter()
        .map(|r| {
            format!(
                "{} {} x{} (worst {:.1e})",
                r.check,
                if r.passed { "ok" } else { "failed" },
                r.trials,
                r.worst_margin
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    let cx = reports
        .iter()
        .filter_map(|r| r.counterexample.as_ref())
        .map(|c| format!(" {c:?}"))
        .collect::<String>();
    outcome(ok, detail + &cx)
}

/// Every merit and inclusion function a fixture defines, with a sampling box.
fn fixture_functions(p: &ProblemFile) -> (Vec<(String, ConvexFn)>, f64) {
    let mut fns = Vec::new();
    if p.constraints.is_some() {
        fns.push((
            "merit".to_string(),
            build_g_tilde(&p.constraint_set().unwrap()),
        ));
    }
    if p.region.is_some() {
        fns.push((
            "region merit".to_string(),
            build_g_tilde(&p.region().unwrap().constraint_set().unwrap()),
        ));
    }
    if p.ball_intersection.is_some() {
        let bi = p.ball_intersection().unwrap();
        fns.push((
            "ball merit".to_string(),
            build_g_tilde(&ConstraintSet::from_balls(&bi.balls()).unwrap()),
        ));
        if let Some(ob) = outer_ball(p) {
            for k in 0..bi.len() {
                fns.push((format!("G_{k}"), build_gk(&bi, &ob, k).unwrap()));
            }
            fns.push(("G".to_string(), build_g(&bi, &ob).unwrap()));
        }
    }
    (fns, 12.0)
}

/// The file's outer ball, or a radius halfway between the nearest and
/// farthest center distances when the file gives none.
fn outer_ball(p: &ProblemFile) -> Option<OuterBall> {
    let bi = p.ball_intersection().ok()?;
    let c = p.outer_center().ok()?;
    let radius = p.outer.as_ref().and_then(|o| o.radius).unwrap_or_else(|| {
        let d = hullscope::geometry::dist(&c, &bi.centers[0]).unwrap();
        d + 0.5 * bi.radius
    });
    Some(OuterBall::new(c, radius).unwrap())
}

fn convexity_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_606);
    let (mut checked, mut worst) = (0usize, f64::INFINITY);
    let mut failures = Vec::new();
    for name in FIXTURES {
        let p = fixture(name);
        let (fns, half) = fixture_functions(&p);
        for (label, f) in &fns {
            for _ in 0..1000 {
                let x = v(&[rng.random_range(-half..half), rng.random_range(-half..half)]);
                let y = v(&[rng.random_range(-half..half), rng.random_range(-half..half)]);
                let (fx, fy) = (f.value(&x).unwrap(), f.value(&y).unwrap());
                let fm = f.value(&(&x + &y).scale(0.5)).unwrap();
                let e = f.eval(&x).unwrap();
                let lin = fx + e.subgradient.dot(&(&y - &x)).unwrap();
                let gap = (0.5 * (fx + fy) - fm).min(fy - lin);
                worst = worst.min(gap);
                checked += 1;
                if gap < -1e-9 {
                    failures.push(format!("{name}/{label} at {x:?},{y:?}: {gap:e}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} pairs, worst slack {worst:.2e}, failures {failures:?}"),
    )
}

fn sign_characterization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_607);
    let mut detail = Vec::new();
    let mut ok = true;
    for name in FIXTURES {
        let p = fixture(name);
        let Some(ob) = outer_ball(&p) else { continue };
        let bi = p.ball_intersection().unwrap();
        let g = build_g(&bi, &ob).unwrap();
        let (mut outside, mut difference, mut bad) = (0, 0, 0);
        let center = &bi.centers[0];
        let reach = 3.0 * bi.radius;
        for i in 0..10_000 {
            // odd draws come from the first ball so C1 is well represented
            let span = if i % 2 == 0 { reach } else { bi.radius };
            let x = v(&[
                center[0] + rng.random_range(-span..span),
                center[1] + rng.random_range(-span..span),
            ]);
            let gx = g.value(&x).unwrap();
            let in_c1 = bi.contains(&x, 0.0).unwrap();
            if !in_c1 {
                outside += 1;
                bad += (gx <= -1e-9) as usize;
            } else if hullscope::geometry::dist(&x, &ob.center).unwrap() >= ob.radius {
                difference += 1;
                bad += (gx > 1e-9) as usize;
            }
        }
        ok &= bad == 0;
        detail.push(format!(
            "{name}: {outside} outside, {difference} in difference, {bad} violations"
        ));
    }
    outcome(ok, detail.join("; "))
}

fn sandwich() -> Outcome {
    let p = fixture("square-and-disk");
    let delta = p.delta.unwrap();
    let r = bound_max_distance(
        &p.region().unwrap(),
        &p.ball_intersection().unwrap(),
        &p.outer_center().unwrap(),
        delta,
        &AppConfig::default(),
    )
    .unwrap();
    let in_band = r.v_c - 1e-3 <= r.dist_x_hat && r.dist_x_hat <= r.v_c + delta + 1e-3;
    let ok_square = (r.v_c - 4.5).abs() <= 1e-3 && in_band;

    let big = fixture("big-square");
    let rejected = match bound_max_distance(
        &big.region().unwrap(),
        &big.ball_intersection().unwrap(),
        &big.outer_center().unwrap(),
        big.delta.unwrap(),
        &AppConfig::default(),
    ) {
        Err(Error::HypothesisViolated {
            hypothesis,
            counterexample,
            distance,
        }) => {
            let inside = ConvexRegion::cube(&[-10.0, -10.0], &[10.0, 10.0])
                .unwrap()
                .contains(&counterexample, 1e-9)
                .unwrap();
            (inside && distance > big.delta.unwrap())
                .then(|| format!("{hypothesis} at {counterexample:?}"))
        }
        _ => None,
    };
    outcome(
        ok_square && rejected.is_some(),
        format!(
            "V_c = {:.6}, |x_hat - c| = {:.6}; big square: {}",
            r.v_c,
            r.dist_x_hat,
            rejected.unwrap_or_else(|| "not rejected".into())
        ),
    )
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hullscope");
    let runs: Vec<(&str, &str, Vec<&str>)> = vec![
        ("feas", "disjoint-disks", vec![]),
        ("feas", "overlapping-disks", vec!["--x0", "10,10"]),
        ("inclusion", "single-disk-far-c", vec![]),
        ("inclusion", "lens-far-c", vec!["--r", "4.5"]),
        ("inclusion", "c-inside", vec![]),
        ("farthest", "single-disk-far-c", vec![]),
        ("farthest", "lens-far-c", vec![]),
        ("appbound", "square-and-disk", vec!["--seed", "7"]),
        ("appbound", "big-square", vec!["--seed", "7"]),
        ("appbound", "disk-self", vec![]),
    ];
    let mut differing = Vec::new();
    for (cmd, name, extra) in &runs {
        let once = || {
            Command::new(bin)
                .arg(cmd)
                .arg(fixture_path(name))
                .args(extra)
                .env("HULLSCOPE_LOG", "off")
                .output()
                .unwrap()
        };
        let (a, b) = (once(), once());
        if a.stdout != b.stdout || a.status.code() != b.status.code() || a.stdout.is_empty() {
            differing.push(format!("{cmd} {name}"));
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands run twice, differing: {differing:?}",
            runs.len()
        ),
    )
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(
            1,
            "feasibility verdicts agree with the grid oracle",
            Some(s(60)),
            feasibility_agreement,
        ),
        run(
            2,
            "disjoint disks merit minimum",
            Some(s(1)),
            disjoint_disks_value,
        ),
        run(
            3,
            "inclusion verdicts agree with the grid oracle",
            Some(s(120)),
            inclusion_agreement,
        ),
        run(
            4,
            "farthest-point values and step bound",
            Some(s(20)),
            farthest_values,
        ),
        run(
            5,
            "randomized falsification checks",
            Some(s(60)),
            falsification_checks,
        ),
        run(
            6,
            "convexity and subgradient inequality on fixtures",
            None,
            convexity_properties,
        ),
        run(
            7,
            "sign of G outside C1 and on the difference set",
            None,
            sign_characterization,
        ),
        run(
            8,
            "sandwich bound and covering rejection",
            Some(s(10)),
            sandwich,
        ),
        run(9, "byte-identical CLI reports", None, cli_determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
