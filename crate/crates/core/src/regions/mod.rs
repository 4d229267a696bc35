//! Bound evaluation for the seven inner/outer bound families and the
//! auxiliary-distribution search that traces their frontiers.

mod aux;
mod bounds;
mod search;

pub use aux::{extend_to_full_joint, AuxDims, AuxiliaryJoint, Theorem, Variant, A, K, U};
pub use bounds::{eval_bounds, membership, BoundSet, RateTriple, MEMBERSHIP_SLACK};
pub use search::{
    evaluate_candidates, pareto_frontier, region_scan, region_scan_with, sample_candidates,
    secrecy_capacity, secrecy_capacity_with, CapacityEstimate, FrontierPoint, SearchConfig,
};
