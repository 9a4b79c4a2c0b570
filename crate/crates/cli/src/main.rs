//! `qfc`: config-driven experiment runner for the feedback control
//! toolkit. Each invocation reads one key = value config file, runs a
//! single experiment, and writes CSV files plus a manifest into the
//! output directory. Identical config and seed reproduce every CSV
//! byte for byte.

mod config;
mod experiments;
mod output;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;

use config::{parse_config, Experiment};
use output::RunWriter;

#[derive(Parser)]
#[command(name = "qfc", version, about = "Quantum feedback control experiments")]
struct Cli {
    /// Experiment to run: fig1a, fig1b, eps_sweep, mub_audit or
    /// steady_curve. Must agree with the config file.
    experiment: String,
    /// Key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let requested = Experiment::parse(&cli.experiment)?;
    let text = fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let mut cfg = parse_config(&text)
        .with_context(|| format!("parsing {}", cli.config.display()))?;
    if cfg.experiment != requested {
        bail!(
            "config file sets experiment = {}, but the command line asked for {requested}",
            cfg.experiment
        );
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.out {
        cfg.output_path = dir;
    }

    let start = Instant::now();
    // On any error the writer's Drop removes whatever was written.
    let mut writer = RunWriter::new(&cfg.output_path)?;
    experiments::run(&cfg, &mut writer)?;
    writer.finish(&cfg, start.elapsed())
}
