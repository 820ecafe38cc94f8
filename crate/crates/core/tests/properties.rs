use proptest::prelude::*;

use hullscope::application::{hit_and_run, ConvexRegion};
use hullscope::geometry::Vector;
use hullscope::inclusion::{
    check_inclusion, dykstra_project, BallIntersection, InclusionVerdict, OuterBall,
};
use hullscope::minimize::SolverConfig;
use hullscope::oracle::{grid_max_distance, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

/// Two or three unit-ish disks whose centers lie near the origin.
fn intersection() -> impl Strategy<Value = BallIntersection> {
    (
        0.5..1.5f64,
        prop::collection::vec((0.0..std::f64::consts::TAU, 0.0..0.7f64), 1..=3),
    )
        .prop_map(|(r, cs)| {
            let centers = cs
                .into_iter()
                .map(|(a, s)| v(&[r * s * a.cos(), r * s * a.sin()]))
                .collect();
            BallIntersection::new(centers, r).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_lands_in_the_intersection(bi in intersection(), y in prop::array::uniform2(-5.0..5.0f64)) {
        let p = dykstra_project(&bi.balls(), &v(&y), 100_000, 1e-12).unwrap();
        prop_assert!(p.converged);
        prop_assert!(bi.contains(&p.point, 1e-9).unwrap());
    }

    #[test]
    fn points_of_the_intersection_are_within_a_diameter(bi in intersection(), seed in any::<u64>()) {
        let region = ConvexRegion::from_intersection(&bi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = dykstra_project(&bi.balls(), &v(&[0.0, 0.0]), 100_000, 1e-12).unwrap().point;
        let pts = hit_and_run(&region, &start, 50, &mut rng).unwrap();
        for w in pts.windows(2) {
            prop_assert!((&w[0] - &w[1]).norm() <= 2.0 * bi.radius + 1e-9);
            prop_assert!(bi.contains(&w[1], 1e-9).unwrap());
        }
    }

    #[test]
    fn inclusion_is_monotone_in_the_radius(bi in intersection(), angle in 0.0..std::f64::consts::TAU) {
        let c = v(&[5.0 * angle.cos(), 5.0 * angle.sin()]);
        let r_max = grid_max_distance(&bi, &c, &GridSpec::around(&bi, 1e-2).unwrap()).unwrap().r_max;
        let cfg = SolverConfig::default();
        let mut seen_included = false;
        for k in 0..8 {
            let r = r_max - 0.5 + 0.15 * k as f64;
            if (r - r_max).abs() < 0.03 {
                continue;
            }
            let verdict = check_inclusion(&bi, &OuterBall::new(c.clone(), r).unwrap(), &cfg).unwrap().verdict;
            if seen_included {
                prop_assert_eq!(verdict, InclusionVerdict::Included);
            }
            seen_included |= verdict == InclusionVerdict::Included;
        }
        prop_assert!(seen_included);
    }
}
