//! Randomized falsification checks, with trial counts from the command line.

use hullscope::oracle::{
    check_equidistant_ray_dominance, check_far_point_separation, check_farthest_center_persistence,
    check_outside_point_separation,
};

fn main() -> hullscope::error::Result<()> {
    let trials: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000);
    let reports = [
        check_outside_point_separation(trials, 11)?,
        check_far_point_separation(trials, 12)?,
        check_equidistant_ray_dominance(trials, 13)?,
        check_farthest_center_persistence(trials, 14)?,
    ];
    for r in &reports {
        println!(
            "{:<30} {:>7} trials  {}  worst margin {:.3e}",
            r.check,
            r.trials,
            if r.passed { "pass" } else { "FAIL" },
            r.worst_margin
        );
        if let Some(cx) = &r.counterexample {
            println!("  counterexample: {}", serde_json::to_string(cx).unwrap());
        }
    }
    Ok(())
}
