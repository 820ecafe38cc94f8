//! Brute-force answers next to the solver's.

use hullscope::farthest::{solve_farthest, BisectionConfig};
use hullscope::feasibility::ConstraintSet;
use hullscope::geometry::{Ball, Vector};
use hullscope::inclusion::BallIntersection;
use hullscope::oracle::{grid_feasible, grid_max_distance, GridSpec};

fn main() -> hullscope::error::Result<()> {
    let v = |x: f64, y: f64| Vector::new(vec![x, y]);
    let cs =
        ConstraintSet::from_balls(&[Ball::new(v(0.0, 0.0)?, 1.0)?, Ball::new(v(3.0, 0.0)?, 1.0)?])?;
    let grid = GridSpec::new(v(-2.0, -2.0)?, v(5.0, 2.0)?, 1e-2)?;
    let g = grid_feasible(&cs, &grid)?;
    println!(
        "disjoint disks: feasible {}, merit minimum {:.4} at {:?}",
        g.feasible, g.min_g_tilde, g.argmin_g_tilde
    );

    let lens = BallIntersection::new(vec![v(0.0, 0.0)?, v(1.0, 0.0)?], 1.0)?;
    let c = v(4.0, 0.0)?;
    let scan = grid_max_distance(&lens, &c, &GridSpec::around(&lens, 1e-3)?)?;
    let bisect = solve_farthest(&lens, &c, &BisectionConfig::default())?;
    println!(
        "lens: grid {:.5} ({} points inside), bisection {:.5}",
        scan.r_max, scan.points_inside, bisect.r_star
    );
    Ok(())
}
