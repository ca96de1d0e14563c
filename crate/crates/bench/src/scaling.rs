//! Runtime sweeps over particle count and lane count.

use serde::{Deserialize, Serialize};
use tsdf_mcl::map::TsdfMap;
use tsdf_mcl::mcl::LocalSigmas;
use tsdf_mcl::parallel::{benchmark_sensor_update, BenchmarkRecord, BenchmarkSetup};
use tsdf_mcl::scene::{simulate_scan, Scene};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};

/// Spread of the benchmark particle cloud around the first trajectory pose.
pub const BENCH_SIGMA_POSITION_M: f64 = 0.5;
pub const BENCH_SIGMA_ROTATION_RAD: f64 = 0.1;

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Returns `None` for fewer than two points or when all `x` are equal.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub records: Vec<BenchmarkRecord>,
    /// Runtime vs particle count at the first lane setting.
    pub fit: Option<LinearFit>,
    /// median(first lane setting) / median(last lane setting) at the largest N.
    pub speedup: Option<f64>,
}

impl ScalingReport {
    /// `(n, median_ms)` pairs at the first lane setting, in grid order.
    pub fn runtime_series(&self) -> Vec<(usize, f64)> {
        let Some(first) = self.records.first() else {
            return Vec::new();
        };
        self.records
            .iter()
            .filter(|r| r.lanes == first.lanes)
            .map(|r| (r.n_particles, r.median_ms))
            .collect()
    }
}

/// Ratio of median runtimes, `baseline / candidate`.
pub fn speedup(baseline: &BenchmarkRecord, candidate: &BenchmarkRecord) -> f64 {
    baseline.median_ms / candidate.median_ms
}

/// Benchmarks every `(bench_particles x bench_lanes)` grid point on one scan taken
/// at the first trajectory pose.
pub fn run_scaling_benchmark(
    cfg: &ExperimentConfig,
    scene: &Scene<f64>,
    map: &TsdfMap<f64>,
) -> Result<ScalingReport> {
    if cfg.bench_particles.is_empty() || cfg.bench_lanes.is_empty() {
        return Err(BenchError::Config {
            field: "bench_particles",
            msg: "grid must not be empty".into(),
        });
    }
    let center = cfg.load_trajectory()?[0].pose;
    let scan = simulate_scan(
        scene,
        &center,
        &cfg.scan_pattern(),
        cfg.scan_noise_m,
        cfg.seed,
    );
    let params = cfg.sensor_params()?;
    let mut records = Vec::with_capacity(cfg.bench_particles.len() * cfg.bench_lanes.len());
    for &lanes in &cfg.bench_lanes {
        for &n in &cfg.bench_particles {
            let setup = BenchmarkSetup {
                n_particles: n,
                center,
                sigmas: LocalSigmas::new(BENCH_SIGMA_POSITION_M, BENCH_SIGMA_ROTATION_RAD),
                lanes,
                trials: cfg.bench_trials,
                seed: cfg.seed,
            };
            records.push(benchmark_sensor_update(&setup, &scan, map, &params)?);
        }
    }
    let mut report = ScalingReport {
        records,
        fit: None,
        speedup: None,
    };
    let series: Vec<(f64, f64)> = report
        .runtime_series()
        .iter()
        .map(|&(n, t)| (n as f64, t))
        .collect();
    report.fit = linear_fit(&series);
    if cfg.bench_lanes.len() > 1 {
        let n_max = *cfg.bench_particles.iter().max().expect("non-empty");
        let at = |lanes: usize| {
            report
                .records
                .iter()
                .find(|r| r.n_particles == n_max && r.lanes == lanes)
        };
        if let (Some(a), Some(b)) = (
            at(cfg.bench_lanes[0]),
            at(*cfg.bench_lanes.last().expect("non-empty")),
        ) {
            report.speedup = Some(speedup(a, b));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_unit_r_squared() {
        let f = linear_fit(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r_squared_oracle() {
        // y = 1, 3, 2, 4 at x = 1..4: slope 0.8, intercept 0.5, r^2 = 0.64
        let f = linear_fit(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 4.0)]).unwrap();
        assert!((f.slope - 0.8).abs() < 1e-12);
        assert!((f.intercept - 0.5).abs() < 1e-12);
        assert!((f.r_squared - 0.64).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits() {
        assert!(linear_fit(&[(1.0, 1.0)]).is_none());
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn speedup_is_ratio_of_medians() {
        let rec = |lanes, ms| BenchmarkRecord {
            n_particles: 100,
            lanes,
            scan_points: 10,
            stride: 1,
            median_ms: ms,
            trials: 1,
            lookups: 1000,
        };
        assert_eq!(speedup(&rec(1, 12.0), &rec(4, 4.0)), 3.0);
    }
}
