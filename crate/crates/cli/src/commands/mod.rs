pub mod check;
pub mod geometry;
pub mod report;
pub mod sample;
pub mod simulate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use eulerbench_geometry::{FoliationOptions, RayOptions};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "eulerbench", version, about = "Numerical workbench for compressible Euler in the acoustic-metric formulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a configured run; writes snapshots, diagnostics and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate identity residuals on a snapshot file.
    Check {
        #[arg(long)]
        snapshots: PathBuf,
        /// Comma-separated identity ids, or `all`.
        #[arg(long, default_value = "all")]
        identities: String,
        #[arg(long)]
        out: PathBuf,
        /// Use every `stride`-th snapshot.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Snapshot file with half the spacing; adds a convergence table.
        #[arg(long)]
        refined: Option<PathBuf>,
    },
    /// Sample the ratio of an inequality over random band-limited inputs.
    Sample {
        #[arg(long)]
        inequality: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5.0)]
        band: f64,
        #[arg(long, default_value_t = 32)]
        grid_n: usize,
        /// Replace the sampled velocity by a constant vector.
        #[arg(long)]
        constant_v: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Build null foliations, frames and the functional G from a snapshot file.
    Geometry {
        #[arg(long)]
        snapshots: PathBuf,
        /// axes | diagonals | default | z
        #[arg(long, default_value = "default")]
        theta_lattice: String,
        #[arg(long, default_value_t = 8)]
        r_count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.5)]
        s0: f64,
        #[arg(long, default_value_t = 9)]
        rays_per_length: usize,
        #[arg(long, default_value_t = 11)]
        time_samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        rtol: f64,
    },
    /// Summarize a run directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Run the acceptance suite and print one line per criterion.
    Acceptance {
        /// Comma-separated criterion numbers; default all.
        #[arg(long)]
        only: Option<String>,
        /// Also write the lines to `<out>/acceptance.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs a parsed command; returns whether every reported check passed.
pub fn dispatch(command: Command, arguments: Vec<String>) -> Result<bool> {
    match command {
        Command::Simulate { config, out } => simulate::run(&config, &out, arguments).map(|_| true),
        Command::Check {
            snapshots,
            identities,
            out,
            stride,
            refined,
        } => check::run(
            &check::CheckArgs {
                snapshots: &snapshots,
                identities: &identities,
                out: &out,
                stride,
                refined: refined.as_deref(),
            },
            arguments,
        )
        .map(|_| true),
        Command::Sample {
            inequality,
            n,
            seed,
            band,
            grid_n,
            constant_v,
            out,
        } => sample::run(
            &sample::SampleArgs {
                inequality: &inequality,
                n,
                seed,
                band,
                grid_n,
                constant_v,
                out: &out,
            },
            arguments,
        )
        .map(|_| true),
        Command::Geometry {
            snapshots,
            theta_lattice,
            r_count,
            out,
            s0,
            rays_per_length,
            time_samples,
            rtol,
        } => {
            let options = FoliationOptions {
                rays_per_length,
                time_samples,
                t_end: None,
                rays: RayOptions {
                    rtol,
                    atol: 0.1 * rtol,
                    ..RayOptions::default()
                },
            };
            geometry::run(
                &geometry::GeometryArgs {
                    snapshots: &snapshots,
                    theta_lattice: &theta_lattice,
                    r_count,
                    out: &out,
                    s0,
                    options,
                },
                arguments,
            )
            .map(|_| true)
        }
        Command::Report { dir } => {
            let verdicts = report::run(&dir)?;
            for v in &verdicts {
                println!("{} criterion {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.criterion, v.detail);
            }
            Ok(true)
        }
        Command::Acceptance { only, out } => {
            let selected = crate::acceptance::parse_selection(only.as_deref())?;
            let mut lines = String::new();
            let mut all = true;
            for id in selected {
                let c = crate::acceptance::run_criterion(id);
                println!("{c}");
                lines.push_str(&format!("{c}\n"));
                all &= c.pass;
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| crate::error::CliError::io(&dir, e))?;
                crate::artifacts::write_atomic(dir.join("acceptance.txt"), lines.as_bytes())?;
            }
            Ok(all)
        }
    }
}
