//! Two disks that overlap and two that do not.

use hullscope::feasibility::{build_g_tilde, check_feasibility, ConstraintSet};
use hullscope::geometry::{Ball, Vector};
use hullscope::minimize::SolverConfig;

fn disk(x: f64, y: f64, r: f64) -> Ball {
    Ball::new(Vector::new(vec![x, y]).unwrap(), r).unwrap()
}

fn main() -> hullscope::error::Result<()> {
    let cfg = SolverConfig::default();
    for (name, balls) in [
        (
            "overlapping",
            vec![disk(0.0, 0.0, 1.0), disk(1.0, 0.0, 1.0)],
        ),
        ("disjoint", vec![disk(0.0, 0.0, 1.0), disk(3.0, 0.0, 1.0)]),
    ] {
        let cs = ConstraintSet::from_balls(&balls)?;
        let x0 = Vector::new(vec![10.0, 10.0])?;
        let report = check_feasibility(&cs, &x0, &cfg)?;
        println!(
            "{name}: {:?}, merit minimum {:.6} at {:?}",
            report.verdict, report.g_tilde_min, report.best_point
        );
        let merit = build_g_tilde(&cs);
        println!(
            "  merit at the midpoint of the centers: {}",
            merit.value(&cs.default_start())?
        );
    }
    Ok(())
}
