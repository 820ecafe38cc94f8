//! Is the lens of two unit disks inside B((4,0), r)?

use hullscope::geometry::Vector;
use hullscope::inclusion::{check_inclusion, BallIntersection, OuterBall};
use hullscope::minimize::SolverConfig;

fn main() -> hullscope::error::Result<()> {
    let lens = BallIntersection::new(
        vec![Vector::new(vec![0.0, 0.0])?, Vector::new(vec![1.0, 0.0])?],
        1.0,
    )?;
    let c = Vector::new(vec![4.0, 0.0])?;
    for r in [3.5, 3.9, 4.1, 4.5] {
        let report = check_inclusion(
            &lens,
            &OuterBall::new(c.clone(), r)?,
            &SolverConfig::default(),
        )?;
        println!(
            "r = {r}: {:?}, x* = {:?}, G(x*) = {:.3e}",
            report.verdict, report.x_star, report.g_at_xstar
        );
    }
    Ok(())
}
