//! Convex feasibility and ball-intersection geometry with subgradient methods.
//!
//! - [`feasibility`]: is `∩ {g_k ≤ 0}` nonempty? Decided from the minimum of `Σ g_k⁺`.
//! - [`inclusion`]: is an intersection of equal-radius balls inside an outer ball?
//! - [`farthest`]: farthest point of the intersection from a center, by bisection.
//! - [`application`]: sandwich bound on the farthest distance over a covering region.
//! - [`oracle`]: grid scans and randomized checks used as ground truth in tests.

pub mod application;
pub mod cli;
pub mod convexfn;
pub mod error;
pub mod farthest;
pub mod feasibility;
pub mod geometry;
pub mod inclusion;
pub mod minimize;
pub mod oracle;
