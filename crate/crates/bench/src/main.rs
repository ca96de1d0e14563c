use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcl_bench::output::{
    write_bench_jsonl, write_json, write_runtime_scaling_csv, write_translation_error_csv,
    BENCH_JSONL, RUNTIME_SCALING_CSV, TRANSLATION_ERROR_CSV,
};
use mcl_bench::{
    apply_lane_override, run_localization, run_scaling_benchmark, ExperimentConfig, LANES_ENV,
};

#[derive(Parser)]
#[command(
    name = "tsdf-mcl",
    version,
    about = "Monte Carlo localization on TSDF maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one localization experiment and write translation_error.csv.
    Localize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the runtime sweep and write runtime_scaling.csv and bench.jsonl.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build a TSDF map from a scene file and save it in binary form.
    BuildMap {
        /// Scene file, or `builtin:office`.
        #[arg(long)]
        scene: String,
        #[arg(long)]
        out: PathBuf,
        /// Fine resolution in meters.
        #[arg(long)]
        res: f64,
        /// Truncation distance in meters.
        #[arg(long)]
        trunc: f64,
        #[arg(long, default_value_t = tsdf_mcl::map::DEFAULT_BLOCK_SIZE)]
        block_size: u32,
    },
}

fn load(path: &Path) -> mcl_bench::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    apply_lane_override(&mut cfg, std::env::var(LANES_ENV).ok().as_deref())?;
    Ok(cfg)
}

fn run(cli: Cli) -> mcl_bench::Result<()> {
    match cli.command {
        Command::Localize { config } => {
            let cfg = load(&config)?;
            let report = run_localization(&cfg)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            write_translation_error_csv(
                File::create(cfg.output_path(TRANSLATION_ERROR_CSV))?,
                &report.metrics,
            )?;
            write_json(&cfg.output_path("localize_report.json"), &report)?;
            for m in &report.metrics {
                println!(
                    "iter {:3}  pos {:.4} m  rot {:.4} rad  ess {:9.1}  sensor {:.1} ms",
                    m.iteration,
                    m.position_error(),
                    m.rotation_error,
                    m.ess,
                    m.sensor_ms
                );
            }
            println!(
                "{} (final position error {:.4} m, threshold {:.4} m over {} iterations)",
                if report.converged {
                    "converged"
                } else {
                    "not converged"
                },
                report.final_position_error,
                report.converge_threshold_m,
                report.converge_window
            );
        }
        Command::Bench { config } => {
            let cfg = load(&config)?;
            let scene = cfg.load_scene()?;
            let map = scene.build_tsdf(cfg.fine_resolution_m, cfg.truncation_m, cfg.block_size)?;
            let report = run_scaling_benchmark(&cfg, &scene, &map)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            write_runtime_scaling_csv(
                File::create(cfg.output_path(RUNTIME_SCALING_CSV))?,
                &report.runtime_series(),
            )?;
            write_bench_jsonl(
                BufWriter::new(File::create(cfg.output_path(BENCH_JSONL))?),
                &report.records,
            )?;
            write_json(&cfg.output_path("bench_report.json"), &report)?;
            for r in &report.records {
                println!("{}", r.to_json_line());
            }
            if let Some(f) = report.fit {
                println!(
                    "linear fit: {:.6} ms/particle, r^2 = {:.4}",
                    f.slope, f.r_squared
                );
            }
            if let Some(s) = report.speedup {
                println!("speedup: {s:.2}");
            }
        }
        Command::BuildMap {
            scene,
            out,
            res,
            trunc,
            block_size,
        } => {
            let cfg = ExperimentConfig {
                scene_path: scene,
                fine_resolution_m: res,
                truncation_m: trunc,
                block_size,
                ..Default::default()
            };
            cfg.validate()?;
            let scene = cfg.load_scene()?;
            let map = scene.build_tsdf(res, trunc, block_size)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&out, tsdf_mcl::map::serialize(&map))?;
            println!(
                "{} blocks, {} cells -> {}",
                map.block_count(),
                map.allocated_cells().count(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
