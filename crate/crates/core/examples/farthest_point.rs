//! Farthest point of a three-disk intersection from an outside center.

use hullscope::farthest::{solve_farthest, step_bound, BisectionConfig};
use hullscope::geometry::Vector;
use hullscope::inclusion::BallIntersection;

fn main() -> hullscope::error::Result<()> {
    let centers = vec![
        Vector::new(vec![0.0, 0.0])?,
        Vector::new(vec![1.0, 0.2])?,
        Vector::new(vec![0.4, 0.9])?,
    ];
    let bi = BallIntersection::new(centers, 1.0)?;
    let c = Vector::new(vec![-3.0, 2.0])?;
    let cfg = BisectionConfig::default();
    let r = solve_farthest(&bi, &c, &cfg)?;
    println!("r* = {:.6} at {:?}", r.r_star, r.x_witness);
    println!(
        "{} halvings (bound {}), {} subgradient iterations",
        r.bisection_steps,
        step_bound(r.initial_r_hi - r.initial_r_lo, cfg.eps),
        r.total_inner_iters
    );
    Ok(())
}
