//! Closed-loop localization runs against simulated ground truth.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use tsdf_mcl::geometry::{Pose6D, StampedPose};
use tsdf_mcl::map::TsdfMap;
use tsdf_mcl::mcl::{
    estimate_pose, initialize_global, initialize_local, motion_update, normalize, resample,
    resample_if_degenerate, sensor_update_with_lanes, OdometryDelta, ParticleSet,
};
use tsdf_mcl::scene::{simulate_scan, Scene};

use crate::config::{ExperimentConfig, InitMode};
use crate::error::{BenchError, Result};

/// Per-iteration accuracy against ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iteration: usize,
    pub error_x: f64,
    pub error_y: f64,
    pub error_z: f64,
    /// Geodesic angle between estimated and true orientation.
    pub rotation_error: f64,
    pub sensor_ms: f64,
    pub ess: f64,
}

impl MetricsRecord {
    pub fn position_error(&self) -> f64 {
        (self.error_x.powi(2) + self.error_y.powi(2) + self.error_z.powi(2)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub metrics: Vec<MetricsRecord>,
    pub converged: bool,
    pub final_position_error: f64,
    pub final_rotation_error: f64,
    pub converge_threshold_m: f64,
    pub converge_window: usize,
}

/// True when the last `window` records all have position error below `threshold`.
pub fn convergence_verdict(metrics: &[MetricsRecord], threshold: f64, window: usize) -> bool {
    metrics.len() >= window
        && metrics[metrics.len() - window..]
            .iter()
            .all(|m| m.position_error() < threshold)
}

/// Independent 64-bit stream id for `(seed, iteration, purpose)`.
fn derive_seed(seed: u64, iteration: usize, purpose: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        .wrapping_add((iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(purpose.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const INIT: u64 = 1;
const MOTION: u64 = 2;
const SCAN: u64 = 3;
const RESAMPLE: u64 = 4;
const ODOMETRY: u64 = 5;

fn odometry(
    cfg: &ExperimentConfig,
    from: &Pose6D<f64>,
    to: &Pose6D<f64>,
    iteration: usize,
) -> OdometryDelta<f64> {
    let d = OdometryDelta::between(from, to).0;
    if cfg.odom_noise_linear_m == 0.0 && cfg.odom_noise_angular_rad == 0.0 {
        return OdometryDelta(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, iteration, ODOMETRY));
    let mut g = |s: f64| {
        if s > 0.0 {
            Normal::new(0.0, s).unwrap().sample(&mut rng)
        } else {
            0.0
        }
    };
    let (l, a) = (cfg.odom_noise_linear_m, cfg.odom_noise_angular_rad);
    OdometryDelta(Pose6D::new(
        d.x + g(l),
        d.y + g(l),
        d.z + g(l),
        d.roll + g(a),
        d.pitch + g(a),
        d.yaw + g(a),
    ))
}

/// Loads the scene and trajectory named by `cfg`, builds the map, and runs.
pub fn run_localization(cfg: &ExperimentConfig) -> Result<LocalizationReport> {
    cfg.validate()?;
    let scene = cfg.load_scene()?;
    let trajectory = cfg.load_trajectory()?;
    let map = scene.build_tsdf(cfg.fine_resolution_m, cfg.truncation_m, cfg.block_size)?;
    run_localization_with(cfg, &scene, &map, &trajectory)
}

/// One MCL iteration per trajectory stamp: motion update from synthesized odometry,
/// virtual scan at the true pose, sensor update, normalization, estimate, resampling.
pub fn run_localization_with(
    cfg: &ExperimentConfig,
    scene: &Scene<f64>,
    map: &TsdfMap<f64>,
    trajectory: &[StampedPose<f64>],
) -> Result<LocalizationReport> {
    if trajectory.len() < cfg.iterations {
        return Err(BenchError::Config {
            field: "iterations",
            msg: format!(
                "trajectory has {} stamps, {} iterations requested",
                trajectory.len(),
                cfg.iterations
            ),
        });
    }
    let pattern = cfg.scan_pattern();
    let sensor = cfg.sensor_params()?;
    let motion = cfg.motion_noise();
    let degenerate = |iteration: usize| {
        move |e: tsdf_mcl::Error| match e {
            tsdf_mcl::Error::DegenerateFilter(msg) => {
                BenchError::DegenerateFilter { iteration, msg }
            }
            other => BenchError::Core(other),
        }
    };

    let start = trajectory[0].pose;
    let init_seed = derive_seed(cfg.seed, 0, INIT);
    let mut set: ParticleSet<f64> = match cfg.init_mode {
        InitMode::Global => {
            initialize_global(scene, cfg.particles, cfg.orientation_mode(), init_seed)?
        }
        InitMode::Local => initialize_local(&start, &cfg.local_sigmas(), cfg.particles, init_seed)?,
    };

    let mut metrics = Vec::with_capacity(cfg.iterations);
    for k in 0..cfg.iterations {
        let truth = trajectory[k].pose;
        if k > 0 {
            let delta = odometry(cfg, &trajectory[k - 1].pose, &truth, k);
            set = motion_update(set, &delta, &motion, derive_seed(cfg.seed, k, MOTION));
        }
        let scan = simulate_scan(
            scene,
            &truth,
            &pattern,
            cfg.scan_noise_m,
            derive_seed(cfg.seed, k, SCAN),
        );

        let t0 = Instant::now();
        set = sensor_update_with_lanes(set, &scan, map, &sensor, cfg.lanes);
        let sensor_ms = t0.elapsed().as_secs_f64() * 1e3;

        set = normalize(set).map_err(degenerate(k))?;
        let ess = set.effective_sample_size();
        let est = estimate_pose(&set, cfg.estimate_mode()).map_err(degenerate(k))?;
        metrics.push(MetricsRecord {
            iteration: k,
            error_x: (est.x - truth.x).abs(),
            error_y: (est.y - truth.y).abs(),
            error_z: (est.z - truth.z).abs(),
            rotation_error: est.quaternion().angle_to(&truth.quaternion()),
            sensor_ms,
            ess,
        });

        let rs = derive_seed(cfg.seed, k, RESAMPLE);
        set = match cfg.resample_ess_fraction {
            Some(f) => resample_if_degenerate(set, f, rs)?,
            None => resample(&set, rs)?,
        };
    }

    let threshold = cfg.converge_threshold();
    let last = metrics.last().expect("at least one iteration");
    Ok(LocalizationReport {
        converged: convergence_verdict(&metrics, threshold, cfg.converge_window),
        final_position_error: last.position_error(),
        final_rotation_error: last.rotation_error,
        converge_threshold_m: threshold,
        converge_window: cfg.converge_window,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, e: f64) -> MetricsRecord {
        MetricsRecord {
            iteration: i,
            error_x: e,
            error_y: 0.0,
            error_z: 0.0,
            rotation_error: 0.0,
            sensor_ms: 0.0,
            ess: 1.0,
        }
    }

    #[test]
    fn verdict_needs_full_window() {
        let m: Vec<_> = [1.0, 0.5, 0.05, 0.05, 0.05]
            .iter()
            .enumerate()
            .map(|(i, &e)| rec(i, e))
            .collect();
        assert!(convergence_verdict(&m, 0.12, 3));
        assert!(!convergence_verdict(&m, 0.12, 4));
        assert!(!convergence_verdict(&m[..2], 0.12, 3));
    }

    #[test]
    fn seeds_differ_by_purpose_and_iteration() {
        let a = derive_seed(7, 3, MOTION);
        assert_ne!(a, derive_seed(7, 3, SCAN));
        assert_ne!(a, derive_seed(7, 4, MOTION));
        assert_ne!(a, derive_seed(8, 3, MOTION));
        assert_eq!(a, derive_seed(7, 3, MOTION));
    }

    #[test]
    fn short_trajectory_is_a_config_error() {
        let cfg = ExperimentConfig {
            iterations: 5,
            particles: 10,
            ..Default::default()
        };
        let scene = tsdf_mcl::scene::office_scene();
        let map = scene.build_tsdf(0.2, 0.4, 8).unwrap();
        let traj = tsdf_mcl::scene::office_trajectory(3);
        assert!(matches!(
            run_localization_with(&cfg, &scene, &map, &traj),
            Err(BenchError::Config {
                field: "iterations",
                ..
            })
        ));
    }
}
