//! Flat key-value experiment configuration (TOML syntax, units in the key names).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tsdf_mcl::geometry::{parse_trajectory, StampedPose};
use tsdf_mcl::mcl::{
    EstimateMode, LocalSigmas, LookupMode, MotionNoiseParams, OrientationMode, SensorModelParams,
};
use tsdf_mcl::scene::{office_scene, office_trajectory, ScanPattern, Scene};

use crate::error::{BenchError, Result};

/// Scene or trajectory paths starting with this prefix name a bundled asset instead
/// of a file: `builtin:office` for the scene, `builtin:office` for its trajectory.
pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    Global,
    #[default]
    Local,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalOrientation {
    #[default]
    Bounded,
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lookup {
    #[default]
    Nearest,
    Interpolated,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimate {
    #[default]
    Mean,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scene_path: String,
    pub trajectory_path: String,
    pub output_dir: String,

    pub fine_resolution_m: f64,
    pub truncation_m: f64,
    pub block_size: u32,

    pub scan_rings: usize,
    pub scan_first_elevation_deg: f64,
    pub scan_elevation_step_deg: f64,
    pub scan_azimuth_count: usize,
    pub scan_max_range_m: f64,
    pub scan_noise_m: f64,

    pub particles: usize,
    pub init_mode: InitMode,
    pub init_sigma_position_m: f64,
    pub init_sigma_rotation_rad: f64,
    pub global_orientation: GlobalOrientation,
    pub global_roll_pitch_max_rad: f64,

    /// Diffusion applied by the filter's motion model.
    pub motion_sigma_linear_m: f64,
    pub motion_sigma_angular_rad: f64,
    /// Noise injected into the odometry synthesized from ground truth.
    pub odom_noise_linear_m: f64,
    pub odom_noise_angular_rad: f64,

    pub sensor_sigma_m: f64,
    pub stride: usize,
    pub lookup: Lookup,
    /// Likelihood table spacing; exact evaluation when absent.
    pub lut_resolution_m: Option<f64>,
    pub estimate: Estimate,
    /// Resample only when ESS < fraction * N; every iteration when absent.
    pub resample_ess_fraction: Option<f64>,

    pub lanes: usize,
    pub seed: u64,
    pub iterations: usize,

    /// Defaults to 2 x fine_resolution_m.
    pub converge_threshold_m: Option<f64>,
    pub converge_window: usize,

    pub bench_particles: Vec<usize>,
    pub bench_lanes: Vec<usize>,
    pub bench_trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scene_path: "builtin:office".into(),
            trajectory_path: "builtin:office".into(),
            output_dir: "out".into(),
            fine_resolution_m: 0.06,
            truncation_m: 0.3,
            block_size: 16,
            scan_rings: 16,
            scan_first_elevation_deg: -15.0,
            scan_elevation_step_deg: 2.0,
            scan_azimuth_count: 900,
            scan_max_range_m: 100.0,
            scan_noise_m: 0.0,
            particles: 2000,
            init_mode: InitMode::Local,
            init_sigma_position_m: 0.0,
            init_sigma_rotation_rad: 0.0,
            global_orientation: GlobalOrientation::Bounded,
            global_roll_pitch_max_rad: 15f64.to_radians(),
            motion_sigma_linear_m: 0.02,
            motion_sigma_angular_rad: 0.01,
            odom_noise_linear_m: 0.0,
            odom_noise_angular_rad: 0.0,
            sensor_sigma_m: 0.1,
            stride: 4,
            lookup: Lookup::Nearest,
            lut_resolution_m: None,
            estimate: Estimate::Mean,
            resample_ess_fraction: None,
            lanes: 1,
            seed: 0,
            iterations: 30,
            converge_threshold_m: None,
            converge_window: 5,
            bench_particles: vec![10_000, 20_000, 40_000, 80_000],
            bench_lanes: vec![1],
            bench_trials: 5,
        }
    }
}

fn check(ok: bool, field: &'static str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(BenchError::Config {
            field,
            msg: msg.to_string(),
        })
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config {
            field: "config",
            msg: e.message().to_string(),
        })
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Config {
            field: "config",
            msg: format!("{}: {e}", path.display()),
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.scene_path,
            &mut cfg.trajectory_path,
            &mut cfg.output_dir,
        ] {
            if !p.starts_with(BUILTIN_PREFIX) && Path::new(p.as_str()).is_relative() {
                *p = base.join(p.as_str()).to_string_lossy().into_owned();
            }
        }
        for (field, p) in [
            ("scene_path", &cfg.scene_path),
            ("trajectory_path", &cfg.trajectory_path),
        ] {
            check(
                p.starts_with(BUILTIN_PREFIX) || Path::new(p).is_file(),
                field,
                &format!("no such file: {p}"),
            )?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.fine_resolution_m > 0.0,
            "fine_resolution_m",
            "must be > 0",
        )?;
        check(
            self.truncation_m >= self.fine_resolution_m,
            "truncation_m",
            "must be >= fine_resolution_m",
        )?;
        check(
            self.block_size.is_power_of_two() && self.block_size <= 256,
            "block_size",
            "must be a power of two <= 256",
        )?;
        check(self.scan_rings >= 1, "scan_rings", "must be >= 1")?;
        check(
            self.scan_rings == 1 || self.scan_elevation_step_deg > 0.0,
            "scan_elevation_step_deg",
            "must be > 0",
        )?;
        check(
            self.scan_azimuth_count >= 1,
            "scan_azimuth_count",
            "must be >= 1",
        )?;
        check(
            self.scan_max_range_m > 0.0,
            "scan_max_range_m",
            "must be > 0",
        )?;
        check(self.scan_noise_m >= 0.0, "scan_noise_m", "must be >= 0")?;
        check(self.particles >= 1, "particles", "must be >= 1")?;
        check(
            self.init_sigma_position_m >= 0.0,
            "init_sigma_position_m",
            "must be >= 0",
        )?;
        check(
            self.init_sigma_rotation_rad >= 0.0,
            "init_sigma_rotation_rad",
            "must be >= 0",
        )?;
        check(
            self.global_roll_pitch_max_rad >= 0.0,
            "global_roll_pitch_max_rad",
            "must be >= 0",
        )?;
        check(
            self.motion_sigma_linear_m >= 0.0,
            "motion_sigma_linear_m",
            "must be >= 0",
        )?;
        check(
            self.motion_sigma_angular_rad >= 0.0,
            "motion_sigma_angular_rad",
            "must be >= 0",
        )?;
        check(
            self.odom_noise_linear_m >= 0.0,
            "odom_noise_linear_m",
            "must be >= 0",
        )?;
        check(
            self.odom_noise_angular_rad >= 0.0,
            "odom_noise_angular_rad",
            "must be >= 0",
        )?;
        check(self.sensor_sigma_m > 0.0, "sensor_sigma_m", "must be > 0")?;
        check(self.stride >= 1, "stride", "must be >= 1")?;
        if let Some(r) = self.lut_resolution_m {
            check(r > 0.0, "lut_resolution_m", "must be > 0")?;
        }
        if let Some(f) = self.resample_ess_fraction {
            check(
                (0.0..=1.0).contains(&f),
                "resample_ess_fraction",
                "must be in [0, 1]",
            )?;
        }
        check(self.lanes >= 1, "lanes", "must be >= 1")?;
        check(self.iterations >= 1, "iterations", "must be >= 1")?;
        check(self.converge_window >= 1, "converge_window", "must be >= 1")?;
        if let Some(t) = self.converge_threshold_m {
            check(t > 0.0, "converge_threshold_m", "must be > 0")?;
        }
        check(
            !self.bench_particles.is_empty(),
            "bench_particles",
            "grid must not be empty",
        )?;
        check(
            self.bench_particles.iter().all(|&n| n >= 1),
            "bench_particles",
            "entries must be >= 1",
        )?;
        check(
            !self.bench_lanes.is_empty(),
            "bench_lanes",
            "grid must not be empty",
        )?;
        check(
            self.bench_lanes.iter().all(|&n| n >= 1),
            "bench_lanes",
            "entries must be >= 1",
        )?;
        check(self.bench_trials >= 1, "bench_trials", "must be >= 1")?;
        Ok(())
    }

    pub fn converge_threshold(&self) -> f64 {
        self.converge_threshold_m
            .unwrap_or(2.0 * self.fine_resolution_m)
    }

    pub fn load_scene(&self) -> Result<Scene<f64>> {
        match self.scene_path.strip_prefix(BUILTIN_PREFIX) {
            Some("office") => Ok(office_scene()),
            Some(other) => Err(BenchError::Config {
                field: "scene_path",
                msg: format!("unknown builtin scene `{other}`"),
            }),
            None => {
                let text = read_input("scene_path", &self.scene_path)?;
                Scene::parse(&text).map_err(|e| BenchError::Config {
                    field: "scene_path",
                    msg: e.to_string(),
                })
            }
        }
    }

    pub fn load_trajectory(&self) -> Result<Vec<StampedPose<f64>>> {
        let traj = match self.trajectory_path.strip_prefix(BUILTIN_PREFIX) {
            Some("office") => office_trajectory(self.iterations),
            Some(other) => {
                return Err(BenchError::Config {
                    field: "trajectory_path",
                    msg: format!("unknown builtin trajectory `{other}`"),
                })
            }
            None => {
                let text = read_input("trajectory_path", &self.trajectory_path)?;
                parse_trajectory(&text).map_err(|e| BenchError::Config {
                    field: "trajectory_path",
                    msg: e.to_string(),
                })?
            }
        };
        check(!traj.is_empty(), "trajectory_path", "trajectory is empty")?;
        Ok(traj)
    }

    pub fn scan_pattern(&self) -> ScanPattern<f64> {
        ScanPattern::rings(
            self.scan_rings,
            self.scan_first_elevation_deg,
            self.scan_elevation_step_deg,
            self.scan_azimuth_count,
            self.scan_max_range_m,
        )
    }

    pub fn sensor_params(&self) -> Result<SensorModelParams<f64>> {
        let wrap = |field: &'static str| {
            move |e: tsdf_mcl::Error| BenchError::Config {
                field,
                msg: e.to_string(),
            }
        };
        let mut p = SensorModelParams::new(self.sensor_sigma_m)
            .map_err(wrap("sensor_sigma_m"))?
            .with_stride(self.stride)
            .map_err(wrap("stride"))?
            .with_lookup(match self.lookup {
                Lookup::Nearest => LookupMode::Nearest,
                Lookup::Interpolated => LookupMode::Interpolated,
            });
        if let Some(r) = self.lut_resolution_m {
            p = p
                .with_lut(self.truncation_m, r)
                .map_err(wrap("lut_resolution_m"))?;
        }
        Ok(p)
    }

    pub fn motion_noise(&self) -> MotionNoiseParams<f64> {
        MotionNoiseParams {
            sigma_linear: self.motion_sigma_linear_m,
            sigma_angular: self.motion_sigma_angular_rad,
        }
    }

    pub fn local_sigmas(&self) -> LocalSigmas<f64> {
        LocalSigmas::new(self.init_sigma_position_m, self.init_sigma_rotation_rad)
    }

    pub fn orientation_mode(&self) -> OrientationMode<f64> {
        match self.global_orientation {
            GlobalOrientation::Bounded => OrientationMode::Bounded {
                roll_pitch_max: self.global_roll_pitch_max_rad,
            },
            GlobalOrientation::Full => OrientationMode::FullUniform,
        }
    }

    pub fn estimate_mode(&self) -> EstimateMode {
        match self.estimate {
            Estimate::Mean => EstimateMode::Mean,
            Estimate::Max => EstimateMode::Max,
        }
    }

    pub fn output_path(&self, file: &str) -> PathBuf {
        Path::new(&self.output_dir).join(file)
    }
}

fn read_input(field: &'static str, path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| BenchError::Config {
        field,
        msg: format!("{path}: {e}"),
    })
}
