//! Experiment runner for `tsdf_mcl`: localization runs against simulated ground
//! truth, runtime scaling sweeps and CSV output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod scaling;

pub use config::ExperimentConfig;
pub use error::{BenchError, Result};
pub use experiment::{
    convergence_verdict, run_localization, run_localization_with, LocalizationReport, MetricsRecord,
};
pub use output::emit_plots_csv;
pub use scaling::{linear_fit, run_scaling_benchmark, LinearFit, ScalingReport};

/// Environment variable overriding the configured lane count.
pub const LANES_ENV: &str = "MCL_LANES";

/// Applies `MCL_LANES` to `cfg.lanes` and every `bench_lanes` entry.
pub fn apply_lane_override(cfg: &mut ExperimentConfig, value: Option<&str>) -> Result<()> {
    let Some(v) = value else { return Ok(()) };
    let lanes: usize =
        v.trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| BenchError::Config {
                field: "MCL_LANES",
                msg: format!("expected a positive integer, got `{v}`"),
            })?;
    cfg.lanes = lanes;
    cfg.bench_lanes = vec![lanes];
    Ok(())
}
