use std::path::PathBuf;
use std::process::ExitCode;

use a2glab::error::Result;
use a2glab::pipeline::{run_pipeline, PipelineConfig};
use clap::Parser;

/// Air-to-ground channel synthesis, estimation, clustering and statistics.
#[derive(Debug, Parser)]
#[command(name = "a2glab", version)]
struct Cli {
    /// synth, estimate, cluster, stats, table, calibrate or roundtrip.
    #[arg(long)]
    mode: Option<String>,
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// urban, suburban, rural or industrial.
    #[arg(long)]
    scenario: Option<String>,
    /// Flight height in metres.
    #[arg(long)]
    height: Option<u32>,
    /// Input directory, or recording header for calibrate.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    num_channels: Option<usize>,
    /// Dotted-key override such as `sage.max_paths=10`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    for assignment in &cli.overrides {
        cfg.apply_override(assignment)?;
    }
    if let Some(mode) = &cli.mode {
        cfg.mode = Some(mode.parse()?);
    }
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(scenario) = &cli.scenario {
        cfg.scenario = scenario.parse()?;
    }
    if let Some(height) = cli.height {
        cfg.height_m = height;
    }
    if let Some(input) = &cli.input {
        cfg.input = Some(input.clone());
    }
    if let Some(n) = cli.num_channels {
        cfg.num_channels = n;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("A2GLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    match build_config(&cli).and_then(|cfg| run_pipeline(&cfg)) {
        Ok(outputs) => {
            for file in &outputs.files {
                println!("{}", outputs.out_dir.join(file).display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("a2glab: {err}");
            ExitCode::FAILURE
        }
    }
}
