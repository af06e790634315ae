//! Runs the batch pipeline in stages and reads its files back: synthesis,
//! estimation, clustering and statistics, each reading the previous output.

use a2glab::error::{Error, Result};
use a2glab::hrpe::io::read_estimate;
use a2glab::pipeline::{run_pipeline, Mode, PipelineConfig};
use a2glab::stats::io::read_summary_csv;

/// Returns the number of summary records written by the last stage.
pub fn run_example() -> Result<usize> {
    let root = tempfile::tempdir().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let synth_dir = root.path().join("synth");
    let work_dir = root.path().join("work");
    let mut cfg = PipelineConfig {
        num_channels: 2,
        rng_seed: 5,
        snr_db: Some(20.0),
        ..PipelineConfig::default()
    };
    cfg.timing.num_snapshots = 40;

    // Estimates and clusterings share a directory so the statistics stage
    // finds both.
    let stages = [
        (Mode::Synth, None, &synth_dir),
        (Mode::Estimate, Some(&synth_dir), &work_dir),
        (Mode::Cluster, Some(&work_dir), &work_dir),
        (Mode::Stats, Some(&work_dir), &work_dir),
    ];
    for (mode, input, out_dir) in stages {
        cfg.mode = Some(mode);
        cfg.input = input.cloned();
        cfg.out_dir = out_dir.clone();
        let out = run_pipeline(&cfg)?;
        println!("{:>8}: {} files", mode.as_str(), out.files.len());
    }

    let estimate = read_estimate(&work_dir.join("channel_00000_estimate.csv"))?;
    println!("channel 0: {} paths", estimate.model_order);
    let records = read_summary_csv(&work_dir.join("summary.csv"))?;
    println!("{} summary records", records.len());
    Ok(records.len())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
