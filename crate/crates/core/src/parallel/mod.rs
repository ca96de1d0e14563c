//! Data-parallel sensor evaluation.
//!
//! Particles are stored component-major ([`ParticleSoA`]), split into contiguous
//! per-lane ranges for evaluation, and summed with a pairwise halving reduction.

mod bench;
mod evaluate;
mod reduce;
mod soa;

pub use bench::{benchmark_sensor_update, BenchmarkRecord, BenchmarkSetup};
pub use evaluate::{evaluate_log_likelihoods, evaluate_particles_parallel, lane_ranges};
pub use reduce::{
    tree_reduce_sum, tree_reduce_sum_lanes, tree_reduce_weighted_pose, ReductionBuffer,
    ReductionOutcome, WeightedPoseSums,
};
pub use soa::{pack, unpack, ParticleSoA};

/// Lane count used when the caller does not pick one: the number of hardware threads.
pub fn default_lanes() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
