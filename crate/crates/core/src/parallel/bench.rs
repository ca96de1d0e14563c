use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{evaluate_particles_parallel, pack, tree_reduce_weighted_pose};
use crate::error::{invalid, Result};
use crate::geometry::Pose6D;
use crate::map::TsdfMap;
use crate::mcl::{initialize_local, LocalSigmas, LookupMode, SensorModelParams};
use crate::scalar::Real;
use crate::scene::PointCloud;

/// One timing trial summary, written as a JSON object per line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub n_particles: usize,
    pub lanes: usize,
    pub scan_points: usize,
    pub stride: usize,
    pub median_ms: f64,
    pub trials: usize,
    /// Map lookups performed by one evaluation.
    pub lookups: u64,
}

impl BenchmarkRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Normally distributed particle cloud around `center` and the timing protocol.
#[derive(Clone, Debug)]
pub struct BenchmarkSetup<T> {
    pub n_particles: usize,
    pub center: Pose6D<T>,
    pub sigmas: LocalSigmas<T>,
    pub lanes: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Times sensor evaluation plus the weighted-pose reduction and reports the median
/// over `trials` runs.
pub fn benchmark_sensor_update<T: Real>(
    setup: &BenchmarkSetup<T>,
    scan: &PointCloud<T>,
    map: &TsdfMap<T>,
    params: &SensorModelParams<T>,
) -> Result<BenchmarkRecord> {
    if setup.trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let set = initialize_local(&setup.center, &setup.sigmas, setup.n_particles, setup.seed)?;
    let mut soa = pack(set.particles());
    let lanes = setup.lanes.max(1);
    let mut times = Vec::with_capacity(setup.trials);
    for _ in 0..setup.trials {
        let start = Instant::now();
        let weights = evaluate_particles_parallel(&soa, scan, map, params, lanes);
        let original = std::mem::replace(&mut soa.weight, weights);
        let sums = tree_reduce_weighted_pose(&soa, lanes)?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(sums);
        soa.weight = original;
    }
    times.sort_by(f64::total_cmp);
    let median_ms = if times.len() % 2 == 1 {
        times[times.len() / 2]
    } else {
        0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2])
    };
    let per_point = match params.lookup {
        LookupMode::Nearest => 1,
        LookupMode::Interpolated => 8,
    };
    Ok(BenchmarkRecord {
        n_particles: setup.n_particles,
        lanes,
        scan_points: scan.len(),
        stride: params.subsample_stride,
        median_ms,
        trials: setup.trials,
        lookups: (setup.n_particles * params.used_points(scan.len()) * per_point) as u64,
    })
}
