//! Batch orchestration behind the `a2glab` binary.
//!
//! Each mode reads and writes plain files in the formats of the owning
//! modules. Channels are processed in parallel on `jobs` worker threads;
//! channel `i` always uses seed `rng_seed + i`, so outputs do not depend on
//! the number of workers. Every run writes `manifest.json` next to its
//! outputs.

mod config;
mod report;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::io::{read_cir_set, read_shape, write_cir_set, write_json, write_shape};
use crate::channel::{make_default_shape, ShapeFunction, UcaGeometry};
use crate::clustering::io::{read_clustering, write_clustering};
use crate::clustering::{select_optimal_clustering, Clustering};
use crate::error::{Error, Result};
use crate::hrpe::io::{read_estimate, write_estimate};
use crate::hrpe::{estimate_calibration, sage_estimate, ChannelEstimate};
use crate::stats::io::{
    read_channel_stats, write_channel_stats, write_summary_csv, write_summary_text,
};
use crate::stats::{
    cluster_level_stats, ensemble_summary_with, ChannelStats, EnsembleLabel, SummaryTable,
};
use crate::synth::{
    draw_scenario_clusters, noise_power_for_snr, simulate_calibration_recording,
    synthesize_snapshot, DrawnChannel, ScenarioStatsConfig, SynthesisConfig,
};

pub use config::{ArraySettings, CalibrationSettings, Mode, PipelineConfig};
pub use report::{roundtrip_report, ReportRow};

/// Version tags of the file formats written by this crate.
pub const SCHEMA_VERSIONS: [(&str, u32); 6] = [
    ("cir_set", 1),
    ("estimate", 1),
    ("clustering", 1),
    ("channel_stats", 1),
    ("summary", 1),
    ("calibration", 1),
];

/// Files written by a run, relative to the output directory, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutputs {
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    mode: Mode,
    rng_seed: u64,
    schemas: std::collections::BTreeMap<&'static str, u32>,
    config: serde_json::Value,
    outputs: &'a [String],
}

#[derive(Serialize)]
struct CalibrationRecord {
    doppler_hz: f64,
    delay_s: f64,
    shape_file: String,
}

pub fn channel_stem(index: usize) -> String {
    format!("channel_{index:05}")
}

/// Runs one pipeline mode.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutputs> {
    cfg.validate()?;
    let mode = cfg.mode()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    log::info!("mode {} into {}", mode.as_str(), cfg.out_dir.display());
    let mut files = match mode {
        Mode::Synth => run_synth(cfg)?,
        Mode::Estimate => run_estimate(cfg)?,
        Mode::Cluster => run_cluster(cfg)?,
        Mode::Stats => run_stats(cfg)?,
        Mode::Table => run_table(cfg)?,
        Mode::Calibrate => run_calibrate(cfg)?,
        Mode::Roundtrip => run_roundtrip(cfg)?,
    };
    files.push("manifest.json".to_string());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode,
        rng_seed: cfg.rng_seed,
        schemas: SCHEMA_VERSIONS.into_iter().collect(),
        config: cfg.echo(),
        outputs: &files,
    };
    write_json(&cfg.out_dir.join("manifest.json"), &manifest)?;
    Ok(RunOutputs {
        mode,
        out_dir: cfg.out_dir.clone(),
        files,
    })
}

/// Maps `f` over `0..count` on `jobs` threads, keeping index order.
fn par_map<T, F>(jobs: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

fn load_shape(cfg: &PipelineConfig) -> Result<ShapeFunction> {
    match &cfg.shape {
        Some(path) => read_shape(path),
        None => make_default_shape(
            cfg.timing.bandwidth_hz,
            cfg.timing.num_taps,
            cfg.timing.tap_spacing_s,
        ),
    }
}

fn scenario_table(cfg: &PipelineConfig) -> Result<ScenarioStatsConfig> {
    let mut table = match &cfg.scenario_stats {
        Some(path) => ScenarioStatsConfig::load(path)?,
        None => ScenarioStatsConfig::builtin(),
    };
    table.delay_offset_model = cfg.delay_offset_model;
    Ok(table)
}

fn channel_seed(cfg: &PipelineConfig, index: usize) -> u64 {
    cfg.rng_seed.wrapping_add(index as u64)
}

/// Ground truth of channel `index`: explicit paths, or a scenario draw
/// shifted by `first_arrival_s` and redrawn while it leaves the window.
fn draw_channel(
    cfg: &PipelineConfig,
    table: &ScenarioStatsConfig,
    index: usize,
) -> Result<DrawnChannel> {
    if let Some(paths) = &cfg.paths {
        return Ok(DrawnChannel {
            paths: paths.clone(),
            cluster_ids: vec![0; paths.len()],
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed(cfg, index));
    let window = cfg.timing.max_delay_s();
    for attempt in 0..=cfg.max_redraws {
        let mut drawn = draw_scenario_clusters(table, cfg.scenario, cfg.height_m, &mut rng)?;
        drawn
            .paths
            .iter_mut()
            .for_each(|p| p.delay_s += cfg.first_arrival_s);
        if drawn.paths.iter().all(|p| p.delay_s <= window) {
            if attempt > 0 {
                log::debug!("channel {index}: {attempt} redraws to fit the CIR window");
            }
            return Ok(drawn);
        }
    }
    Err(Error::OutOfRange(format!(
        "channel {index}: no draw fits the {window:.3e} s CIR window after {} attempts",
        cfg.max_redraws + 1
    )))
}

/// Ground-truth estimate and clustering. Drawn channels keep their
/// generating clusters; explicit path lists are clustered like estimates.
fn truth_of(
    cfg: &PipelineConfig,
    drawn: &DrawnChannel,
    geometry: &UcaGeometry,
) -> Result<(ChannelEstimate, Clustering)> {
    let mut order: Vec<usize> = (0..drawn.paths.len()).collect();
    order.sort_by(|&a, &b| drawn.paths[b].power().total_cmp(&drawn.paths[a].power()));
    let paths: Vec<_> = order.iter().map(|&i| drawn.paths[i]).collect();
    let labels: Vec<usize> = order.iter().map(|&i| drawn.cluster_ids[i]).collect();
    let estimate = ChannelEstimate::from_paths(&paths, geometry)?;
    let clustering = if cfg.paths.is_some() {
        select_optimal_clustering(&estimate, &cfg.mcd)?
    } else {
        Clustering::from_labels(&estimate, &labels, f64::NAN, &cfg.mcd)?
    };
    Ok((estimate, clustering))
}

fn synthesize(
    cfg: &PipelineConfig,
    drawn: &DrawnChannel,
    shape: &ShapeFunction,
    index: usize,
) -> Result<crate::channel::ArrayCirSet> {
    let geometry = cfg.array.geometry()?;
    let mut synthesis = SynthesisConfig {
        rng_seed: channel_seed(cfg, index),
        ..cfg.synthesis
    };
    if let Some(snr) = cfg.snr_db {
        let strongest = drawn.paths.iter().map(|p| p.power()).fold(0.0, f64::max);
        synthesis.noise_power = noise_power_for_snr(strongest, snr);
    }
    synthesize_snapshot(&drawn.paths, &[], &geometry, shape, &cfg.timing, &synthesis)
}

fn shape_label(cfg: &PipelineConfig) -> String {
    cfg.shape
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "hann_sinc".to_string())
}

fn synth_channel(
    cfg: &PipelineConfig,
    table: &ScenarioStatsConfig,
    shape: &ShapeFunction,
    index: usize,
) -> Result<(DrawnChannel, crate::channel::ArrayCirSet, Vec<String>)> {
    let stem = channel_stem(index);
    let drawn = draw_channel(cfg, table, index)?;
    let cirs = synthesize(cfg, &drawn, shape, index)?;
    let (truth, truth_clusters) = truth_of(cfg, &drawn, cirs.geometry())?;
    write_cir_set(
        &cfg.out_dir.join(format!("{stem}.json")),
        &cirs,
        &shape_label(cfg),
    )?;
    write_estimate(&cfg.out_dir.join(format!("{stem}_truth.csv")), &truth)?;
    write_clustering(
        &cfg.out_dir.join(format!("{stem}_truth_clusters.csv")),
        &truth_clusters,
    )?;
    let files = vec![
        format!("{stem}.json"),
        format!("{stem}.bin"),
        format!("{stem}_truth.csv"),
        format!("{stem}_truth.json"),
        format!("{stem}_truth_clusters.csv"),
        format!("{stem}_truth_clusters.json"),
    ];
    Ok((drawn, cirs, files))
}

fn run_synth(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let table = scenario_table(cfg)?;
    let shape = load_shape(cfg)?;
    write_shape(&cfg.out_dir.join("shape.json"), &shape)?;
    let per_channel = par_map(cfg.jobs, cfg.num_channels, |i| {
        synth_channel(cfg, &table, &shape, i).map(|(_, _, files)| files)
    })?;
    let mut files = vec!["shape.json".to_string()];
    files.extend(per_channel.into_iter().flatten());
    Ok(files)
}

/// Channel indices of the `channel_NNNNN<suffix>` files in `dir`.
fn discover(dir: &Path, suffix: &str) -> Result<Vec<usize>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut indices = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(digits) = name
            .strip_prefix("channel_")
            .and_then(|r| r.strip_suffix(suffix))
        {
            if digits.len() == 5 && digits.bytes().all(|b| b.is_ascii_digit()) {
                indices.push(digits.parse().expect("five digits"));
            }
        }
    }
    indices.sort_unstable();
    if indices.is_empty() {
        return Err(Error::io(
            dir.join(format!("channel_NNNNN{suffix}")),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no matching channel files"),
        ));
    }
    Ok(indices)
}

fn input_dir(cfg: &PipelineConfig) -> Result<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| Error::validation("input", "an input directory is required"))
}

fn run_estimate(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let input = input_dir(cfg)?;
    let shape = match &cfg.shape {
        Some(path) => read_shape(path)?,
        None if input.join("shape.json").exists() => read_shape(&input.join("shape.json"))?,
        None => load_shape(cfg)?,
    };
    let indices = discover(input, ".json")?;
    let files = par_map(cfg.jobs, indices.len(), |j| {
        let stem = channel_stem(indices[j]);
        let (cirs, _) = read_cir_set(&input.join(format!("{stem}.json")))?;
        let estimate = sage_estimate(&cirs, &shape, &cfg.sage)?;
        log::debug!("{stem}: {} paths", estimate.model_order);
        write_estimate(&cfg.out_dir.join(format!("{stem}_estimate.csv")), &estimate)?;
        Ok(vec![
            format!("{stem}_estimate.csv"),
            format!("{stem}_estimate.json"),
        ])
    })?;
    Ok(files.into_iter().flatten().collect())
}

fn cluster_estimate(
    cfg: &PipelineConfig,
    estimate: &ChannelEstimate,
) -> Result<Option<Clustering>> {
    if estimate.is_empty() {
        return Ok(None);
    }
    select_optimal_clustering(estimate, &cfg.mcd).map(Some)
}

fn run_cluster(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let input = input_dir(cfg)?;
    let indices = discover(input, "_estimate.csv")?;
    let files = par_map(cfg.jobs, indices.len(), |j| {
        let stem = channel_stem(indices[j]);
        let estimate = read_estimate(&input.join(format!("{stem}_estimate.csv")))?;
        match cluster_estimate(cfg, &estimate)? {
            Some(clustering) => {
                write_clustering(
                    &cfg.out_dir.join(format!("{stem}_clusters.csv")),
                    &clustering,
                )?;
                Ok(vec![
                    format!("{stem}_clusters.csv"),
                    format!("{stem}_clusters.json"),
                ])
            }
            None => {
                log::warn!("{stem}: empty estimate, nothing to cluster");
                Ok(Vec::new())
            }
        }
    })?;
    Ok(files.into_iter().flatten().collect())
}

fn label(cfg: &PipelineConfig) -> EnsembleLabel {
    EnsembleLabel::new(cfg.scenario.as_str(), cfg.height_m)
}

fn write_summary(
    cfg: &PipelineConfig,
    stats: &[ChannelStats],
    prefix: &str,
) -> Result<(SummaryTable, Vec<String>)> {
    let row = ensemble_summary_with(stats, &label(cfg), cfg.delay_offset_model)?;
    let table = SummaryTable { rows: vec![row] };
    let stats_name = format!("{prefix}channel_stats.json");
    let csv_name = format!("{prefix}summary.csv");
    let text_name = format!("{prefix}summary.txt");
    write_channel_stats(&cfg.out_dir.join(&stats_name), stats)?;
    write_summary_csv(&cfg.out_dir.join(&csv_name), &table)?;
    write_summary_text(&cfg.out_dir.join(&text_name), &table)?;
    Ok((table, vec![stats_name, csv_name, text_name]))
}

fn run_stats(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let input = input_dir(cfg)?;
    let indices = discover(input, "_estimate.csv")?;
    let stats = par_map(cfg.jobs, indices.len(), |j| {
        let stem = channel_stem(indices[j]);
        let estimate = read_estimate(&input.join(format!("{stem}_estimate.csv")))?;
        if estimate.is_empty() {
            log::warn!("{stem}: empty estimate left out of the statistics");
            return Ok(None);
        }
        let clustering = read_clustering(
            &input.join(format!("{stem}_clusters.csv")),
            &estimate,
            &cfg.mcd,
        )?;
        cluster_level_stats(&clustering, &estimate).map(Some)
    })?;
    let stats: Vec<ChannelStats> = stats.into_iter().flatten().collect();
    Ok(write_summary(cfg, &stats, "")?.1)
}

fn run_table(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let stats = match &cfg.input {
        Some(dir) => {
            let path = dir.join("channel_stats.json");
            read_channel_stats(&path)?
        }
        None => {
            let table = scenario_table(cfg)?;
            let geometry = cfg.array.geometry()?;
            par_map(cfg.jobs, cfg.num_channels, |i| {
                let drawn = draw_channel(cfg, &table, i)?;
                let (truth, clustering) = truth_of(cfg, &drawn, &geometry)?;
                cluster_level_stats(&clustering, &truth)
            })?
        }
    };
    if stats.is_empty() {
        return Err(Error::invalid("no channel statistics to summarize"));
    }
    Ok(write_summary(cfg, &stats, "")?.1)
}

fn run_calibrate(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let mut files = Vec::new();
    let recording = match &cfg.input {
        Some(path) => read_cir_set(path)?.0,
        None => {
            let shape = load_shape(cfg)?;
            let delay = shape.peak_index() as f64 * shape.tap_spacing_s();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            let c = &cfg.calibration;
            let rec = simulate_calibration_recording(
                c.doppler_hz,
                c.snr_db,
                &shape,
                delay,
                c.num_cirs,
                &mut rng,
            )?;
            write_cir_set(&cfg.out_dir.join("recording.json"), &rec, &shape_label(cfg))?;
            files.extend(["recording.json".to_string(), "recording.bin".to_string()]);
            rec
        }
    };
    let estimate = estimate_calibration(&recording)?;
    log::info!(
        "calibration: Doppler {:.3} Hz, delay {:.3e} s",
        estimate.doppler_hz,
        estimate.delay_s
    );
    write_shape(&cfg.out_dir.join("calibrated_shape.json"), &estimate.shape)?;
    write_json(
        &cfg.out_dir.join("calibration.json"),
        &CalibrationRecord {
            doppler_hz: estimate.doppler_hz,
            delay_s: estimate.delay_s,
            shape_file: "calibrated_shape.json".to_string(),
        },
    )?;
    files.extend([
        "calibrated_shape.json".to_string(),
        "calibration.json".to_string(),
    ]);
    Ok(files)
}

fn run_roundtrip(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let table = scenario_table(cfg)?;
    let shape = load_shape(cfg)?;
    write_shape(&cfg.out_dir.join("shape.json"), &shape)?;
    let results = par_map(cfg.jobs, cfg.num_channels, |i| {
        let stem = channel_stem(i);
        let (drawn, cirs, mut files) = synth_channel(cfg, &table, &shape, i)?;
        let (truth, truth_clusters) = truth_of(cfg, &drawn, cirs.geometry())?;
        let truth_stats = cluster_level_stats(&truth_clusters, &truth)?;
        let estimate = sage_estimate(&cirs, &shape, &cfg.sage)?;
        write_estimate(&cfg.out_dir.join(format!("{stem}_estimate.csv")), &estimate)?;
        files.extend([
            format!("{stem}_estimate.csv"),
            format!("{stem}_estimate.json"),
        ]);
        let recovered = match cluster_estimate(cfg, &estimate)? {
            Some(clustering) => {
                write_clustering(
                    &cfg.out_dir.join(format!("{stem}_clusters.csv")),
                    &clustering,
                )?;
                files.extend([
                    format!("{stem}_clusters.csv"),
                    format!("{stem}_clusters.json"),
                ]);
                Some(cluster_level_stats(&clustering, &estimate)?)
            }
            None => None,
        };
        Ok((truth_stats, recovered, files))
    })?;
    let mut files = vec!["shape.json".to_string()];
    let mut truth = Vec::new();
    let mut recovered = Vec::new();
    for (t, r, f) in results {
        truth.push(t);
        recovered.extend(r);
        files.extend(f);
    }
    let (truth_table, truth_files) = write_summary(cfg, &truth, "truth_")?;
    files.extend(truth_files);
    if recovered.is_empty() {
        return Err(Error::DegenerateInput(
            "no channel had an estimated path".into(),
        ));
    }
    let (recovered_table, recovered_files) = write_summary(cfg, &recovered, "")?;
    files.extend(recovered_files);
    let configured = if cfg.paths.is_none() {
        Some(*table.get(cfg.scenario, cfg.height_m)?)
    } else {
        None
    };
    let rows = roundtrip_report(
        configured.as_ref(),
        &truth_table.rows[0],
        &recovered_table.rows[0],
        &truth,
        &recovered,
    );
    report::write_report(&cfg.out_dir.join("roundtrip_report.csv"), &rows)?;
    write_json(&cfg.out_dir.join("roundtrip_report.json"), &rows)?;
    files.extend([
        "roundtrip_report.csv".to_string(),
        "roundtrip_report.json".to_string(),
    ]);
    Ok(files)
}
