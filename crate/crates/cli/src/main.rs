use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mfda_core::experiment::{report_beampattern, run_experiment, ExperimentSpec, GridSpec, RunSettings};
use mfda_core::orchestrator::verify_report;
use mfda_core::OptimizationReport;

/// Movable frequency diverse array covert beamforming experiments.
#[derive(Parser)]
#[command(name = "mfda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write CSV products plus a manifest.
    Run {
        spec: PathBuf,
        /// Output directory (defaults to the experiment's `output_dir`, else `out/`
        /// next to the experiment file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use this single seed instead of the experiment's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweep points.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute every covert constraint of a report.
    Verify { report: PathBuf },
    /// Range-angle beampattern of a report's beamformer as CSV.
    Beampattern {
        report: PathBuf,
        /// `r_lo,r_hi,n:theta_lo,theta_hi,n` with angles in degrees.
        #[arg(long)]
        grid: Option<String>,
        /// Apply the warden-link path loss instead of a fixed reference.
        #[arg(long)]
        raw: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_triplet(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("expected lo,hi,n but got {s:?}");
    }
    Ok((
        parts[0].parse().with_context(|| format!("bad lower bound {:?}", parts[0]))?,
        parts[1].parse().with_context(|| format!("bad upper bound {:?}", parts[1]))?,
        parts[2].parse().with_context(|| format!("bad point count {:?}", parts[2]))?,
    ))
}

fn parse_grid(s: &str) -> Result<GridSpec> {
    let (r, t) = s.split_once(':').context("grid must look like r_lo,r_hi,n:theta_lo,theta_hi,n")?;
    let (r_lo_m, r_hi_m, n_r) = parse_triplet(r)?;
    let (theta_lo_deg, theta_hi_deg, n_theta) = parse_triplet(t)?;
    Ok(GridSpec { r_lo_m, r_hi_m, n_r, theta_lo_deg, theta_hi_deg, n_theta })
}

fn read_report(path: &Path) -> Result<OptimizationReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    OptimizationReport::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { spec, out, seed, threads } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            }
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let parsed = ExperimentSpec::from_json(&text).with_context(|| format!("parsing {}", spec.display()))?;
            let base = spec.parent().unwrap_or(Path::new("."));
            let manifest = run_experiment(&parsed, base, &RunSettings { output_dir: out, seed })?;
            for f in &manifest.files {
                println!("wrote {f}");
            }
            for (point, err) in &manifest.errors {
                eprintln!("failed {point}: {err}");
            }
            Ok(manifest.errors.is_empty())
        }
        Command::Verify { report } => {
            let r = read_report(&report)?;
            let config = r.config()?;
            let d = verify_report(&r, &config)?;
            println!("strategy {}  rate {:.6} bits", r.strategy, r.covert_rate_bits);
            println!("power {:.6e} W of {:.6e} W", d.power_w, d.p_max_w);
            println!("warden  r_m  theta_deg  received_w  threshold_w  kl  dep_lower_bound");
            for e in &d.entries {
                println!(
                    "{} {:.3} {:.4} {:.6e} {:.6e} {:.6e} {:.6}",
                    e.warden, e.r_m, e.theta_deg, e.received_w, e.threshold_w, e.kl, e.dep_lower_bound
                );
            }
            if !d.enforced {
                println!("covertness not enforced for this strategy");
                return Ok(true);
            }
            for v in &d.violations {
                println!("VIOLATION {v}");
            }
            println!("{}", if d.ok() { "OK" } else { "FAILED" });
            Ok(d.ok())
        }
        Command::Beampattern { report, grid, raw, out } => {
            let r = read_report(&report)?;
            let grid = grid.as_deref().map(parse_grid).transpose()?.unwrap_or_default();
            let csv = report_beampattern(&r, &grid, raw)?.to_csv();
            match out {
                Some(p) => fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("800,1200,201:0,60,241").unwrap();
        assert_eq!(g.n_r, 201);
        assert_eq!(g.n_theta, 241);
        assert_eq!(g.theta_hi_deg, 60.0);
        assert!(parse_grid("800,1200:0,60,5").is_err());
        assert!(parse_grid("800,1200,5").is_err());
    }
}
