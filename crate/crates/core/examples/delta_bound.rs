//! Bounding the farthest distance over a square from a disk it covers.

use hullscope::application::{bound_max_distance, AppConfig, ConvexRegion};
use hullscope::error::Error;
use hullscope::geometry::Vector;
use hullscope::inclusion::BallIntersection;

fn main() -> hullscope::error::Result<()> {
    let disk = BallIntersection::new(vec![Vector::new(vec![0.5, 0.5])?], 1.0)?;
    let c = Vector::new(vec![4.0, 0.5])?;
    let square = ConvexRegion::cube(&[-0.5, -0.5], &[1.5, 1.5])?;
    let r = bound_max_distance(&square, &disk, &c, 0.42, &AppConfig::default())?;
    println!(
        "V_c = {:.6}, x_hat = {:?}, |x_hat - c| = {:.6}",
        r.v_c, r.x_hat, r.dist_x_hat
    );
    println!(
        "bounds: [{:.6}, {:.6}], holds: {}",
        r.v_c,
        r.v_c + r.delta,
        r.sandwich_holds
    );

    let big = ConvexRegion::cube(&[-10.0, -10.0], &[10.0, 10.0])?;
    match bound_max_distance(&big, &disk, &c, 0.42, &AppConfig::default()) {
        Err(Error::HypothesisViolated {
            counterexample,
            distance,
            ..
        }) => {
            println!("big square rejected: {counterexample:?} is {distance:.3} from the disk")
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
