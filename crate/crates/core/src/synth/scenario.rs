//! Per-scenario, per-height channel statistics and random channel draws.
//!
//! The shipped defaults transcribe the measured statistics table for the
//! rural, urban and industrial scenarios at heights 0-40 m.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::{wrap_two_pi, PathComponent};
use crate::error::{Error, Result};
use crate::stats::Metric;

const BUILTIN_STATS_JSON: &str = include_str!("../../data/scenario_stats.json");

/// Intra-cluster path counts are drawn uniformly from this range when a
/// cluster has more than one path.
const MULTI_PATH_RANGE: std::ops::RangeInclusive<usize> = 2..=10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Rural,
    Urban,
    Industrial,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Rural, Scenario::Urban, Scenario::Industrial];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Rural => "rural",
            Scenario::Urban => "urban",
            Scenario::Industrial => "industrial",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rural" => Ok(Scenario::Rural),
            "urban" => Ok(Scenario::Urban),
            "industrial" => Ok(Scenario::Industrial),
            other => Err(Error::validation(
                "scenario",
                format!("unknown scenario `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

impl MetricStat {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    fn normal(&self) -> Normal<f64> {
        Normal::new(self.mean, self.std).expect("validated std")
    }
}

/// How the two numbers of the cluster delay offset entry are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayOffsetModel {
    /// `(log10 of the linear mean, log10 of the linear std)` in seconds;
    /// offsets are log-normal with those linear moments.
    #[default]
    LinearMoments,
    /// `(mean, std)` of `log10(offset / 1 s)`.
    Log10Gaussian,
}

/// Distribution parameters of one (scenario, height) cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub composite_delay_spread_log10_s: MetricStat,
    pub composite_azimuth_spread_log10_deg: MetricStat,
    pub cluster_number: MetricStat,
    pub cluster_k_db: MetricStat,
    pub cluster_azimuth_spread_log10_deg: MetricStat,
    pub cluster_delay_spread_log10_s: MetricStat,
    pub cluster_delay_offset_log10_s: MetricStat,
    pub cluster_azimuth_offset_deg: MetricStat,
    pub cluster_power_offset_db: MetricStat,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl ScenarioStats {
    fn slot_mut(&mut self, metric: Metric) -> Option<&mut MetricStat> {
        Some(match metric {
            Metric::CompositeDelaySpread => &mut self.composite_delay_spread_log10_s,
            Metric::CompositeAzimuthSpread => &mut self.composite_azimuth_spread_log10_deg,
            Metric::ClusterNumber => &mut self.cluster_number,
            Metric::ClusterK => &mut self.cluster_k_db,
            Metric::ClusterAzimuthSpread => &mut self.cluster_azimuth_spread_log10_deg,
            Metric::ClusterDelaySpread => &mut self.cluster_delay_spread_log10_s,
            Metric::ClusterDelayOffset => &mut self.cluster_delay_offset_log10_s,
            Metric::ClusterAzimuthOffset => &mut self.cluster_azimuth_offset_deg,
            Metric::ClusterPowerOffset => &mut self.cluster_power_offset_db,
            Metric::R1 | Metric::R2 | Metric::R3 => return None,
        })
    }

    pub fn get(&self, metric: Metric) -> MetricStat {
        match metric {
            Metric::R1 => MetricStat::new(self.r1, 0.0),
            Metric::R2 => MetricStat::new(self.r2, 0.0),
            Metric::R3 => MetricStat::new(self.r3, 0.0),
            m => {
                let mut copy = *self;
                *copy.slot_mut(m).expect("non-ratio metric")
            }
        }
    }

    fn set(&mut self, metric: Metric, stat: MetricStat) {
        match metric {
            Metric::R1 => self.r1 = stat.mean,
            Metric::R2 => self.r2 = stat.mean,
            Metric::R3 => self.r3 = stat.mean,
            m => *self.slot_mut(m).expect("non-ratio metric") = stat,
        }
    }

    pub fn validate(&self, delay_offset_model: DelayOffsetModel) -> Result<()> {
        for metric in Metric::ALL {
            let stat = self.get(metric);
            let field = metric.key();
            if !stat.mean.is_finite() || !stat.std.is_finite() {
                return Err(Error::validation(field, "values must be finite"));
            }
            let std_is_free = metric == Metric::ClusterDelayOffset
                && delay_offset_model == DelayOffsetModel::LinearMoments;
            if !std_is_free && stat.std < 0.0 {
                return Err(Error::validation(field, "std must be >= 0"));
            }
        }
        for (field, r) in [("r1", self.r1), ("r2", self.r2), ("r3", self.r3)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::validation(field, "ratio must lie in [0, 1]"));
            }
        }
        if self.cluster_number.mean < 1.0 {
            return Err(Error::validation(
                Metric::ClusterNumber.key(),
                "mean must be >= 1",
            ));
        }
        Ok(())
    }
}

/// One row of the JSON configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatRecord {
    pub scenario: Scenario,
    pub height_m: u32,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioStatsConfig {
    rows: BTreeMap<(Scenario, u32), ScenarioStats>,
    pub delay_offset_model: DelayOffsetModel,
}

impl ScenarioStatsConfig {
    /// The shipped per-height statistics for all three scenarios.
    pub fn builtin() -> Self {
        Self::from_json_str(BUILTIN_STATS_JSON).expect("shipped table is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let records: Vec<StatRecord> = serde_json::from_str(text)
            .map_err(|e| Error::validation("stats config", e.to_string()))?;
        Self::from_records(&records, DelayOffsetModel::default())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let records: Vec<StatRecord> = crate::channel::io::read_json(path)?;
        Self::from_records(&records, DelayOffsetModel::default())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::channel::io::write_json(path, &self.to_records())
    }

    pub fn from_records(
        records: &[StatRecord],
        delay_offset_model: DelayOffsetModel,
    ) -> Result<Self> {
        let mut seen: BTreeMap<(Scenario, u32), (ScenarioStats, Vec<Metric>)> = BTreeMap::new();
        for rec in records {
            let metric = Metric::from_key(&rec.metric).ok_or_else(|| {
                Error::validation("metric", format!("unknown metric `{}`", rec.metric))
            })?;
            let entry = seen.entry((rec.scenario, rec.height_m)).or_default();
            if entry.1.contains(&metric) {
                return Err(Error::validation(
                    rec.metric.clone(),
                    format!("duplicate entry for {} {} m", rec.scenario, rec.height_m),
                ));
            }
            entry.0.set(metric, MetricStat::new(rec.mean, rec.std));
            entry.1.push(metric);
        }
        let mut rows = BTreeMap::new();
        for ((scenario, height), (stats, present)) in seen {
            if let Some(missing) = Metric::ALL.iter().find(|m| !present.contains(m)) {
                return Err(Error::validation(
                    missing.key(),
                    format!("missing for {scenario} {height} m"),
                ));
            }
            stats.validate(delay_offset_model)?;
            rows.insert((scenario, height), stats);
        }
        Ok(Self {
            rows,
            delay_offset_model,
        })
    }

    pub fn to_records(&self) -> Vec<StatRecord> {
        self.rows
            .iter()
            .flat_map(|(&(scenario, height_m), stats)| {
                Metric::ALL.into_iter().map(move |metric| {
                    let s = stats.get(metric);
                    StatRecord {
                        scenario,
                        height_m,
                        metric: metric.key().to_string(),
                        mean: s.mean,
                        std: s.std,
                    }
                })
            })
            .collect()
    }

    pub fn get(&self, scenario: Scenario, height_m: u32) -> Result<&ScenarioStats> {
        self.rows
            .get(&(scenario, height_m))
            .ok_or_else(|| Error::UnknownScenario {
                scenario: scenario.to_string(),
                height_m,
            })
    }

    /// Replaces (or adds) one cell.
    pub fn insert(
        &mut self,
        scenario: Scenario,
        height_m: u32,
        stats: ScenarioStats,
    ) -> Result<()> {
        stats.validate(self.delay_offset_model)?;
        self.rows.insert((scenario, height_m), stats);
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = (Scenario, u32)> + '_ {
        self.rows.keys().copied()
    }
}

/// A drawn channel with the cluster each path was generated in. Cluster 0
/// is the dominant one.
#[derive(Clone, Debug, PartialEq)]
pub struct DrawnChannel {
    pub paths: Vec<PathComponent>,
    pub cluster_ids: Vec<usize>,
}

impl DrawnChannel {
    pub fn num_clusters(&self) -> usize {
        self.cluster_ids.iter().max().map_or(0, |c| c + 1)
    }

    /// Total power of each generated cluster.
    pub fn cluster_powers(&self) -> Vec<f64> {
        let mut powers = vec![0.0; self.num_clusters()];
        for (p, &c) in self.paths.iter().zip(&self.cluster_ids) {
            powers[c] += p.power();
        }
        powers
    }
}

struct ClusterDraft {
    delay_s: f64,
    azimuth_rad: f64,
    power: f64,
    num_paths: usize,
}

fn draw_path_count<R: Rng + ?Sized>(single_probability: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < single_probability {
        1
    } else {
        rng.random_range(MULTI_PATH_RANGE)
    }
}

fn draw_delay_offset<R: Rng + ?Sized>(
    stat: MetricStat,
    model: DelayOffsetModel,
    rng: &mut R,
) -> f64 {
    match model {
        DelayOffsetModel::LinearMoments => {
            let mean = 10f64.powf(stat.mean);
            let std = 10f64.powf(stat.std);
            let sigma2 = (1.0 + (std / mean).powi(2)).ln();
            LogNormal::new(mean.ln() - sigma2 / 2.0, sigma2.sqrt())
                .expect("finite log-normal parameters")
                .sample(rng)
        }
        DelayOffsetModel::Log10Gaussian => 10f64.powf(stat.normal().sample(rng)),
    }
}

fn rms_delay_spread(paths: &[PathComponent]) -> f64 {
    let total: f64 = paths.iter().map(|p| p.power()).sum();
    let mean: f64 = paths.iter().map(|p| p.power() * p.delay_s).sum::<f64>() / total;
    let mean_sq: f64 = paths
        .iter()
        .map(|p| p.power() * p.delay_s * p.delay_s)
        .sum::<f64>()
        / total;
    (mean_sq - mean * mean).max(0.0).sqrt()
}

/// Draws one channel with its generating cluster structure.
///
/// With probability `r2` the channel has a single cluster (a single path
/// with probability `r1/r2`). Otherwise `C ≥ 2` clusters are drawn: the
/// dominant one has power 1 at delay 0, the others get power offsets that
/// are jointly rescaled to hit a drawn `K`, delay offsets after the
/// dominant cluster and azimuth offsets with random sign. Paths inside a
/// cluster follow a one-sided exponential delay profile starting at the
/// cluster delay and a wrapped Gaussian azimuth spread. Finally the delays
/// are scaled so the composite RMS delay spread equals a drawn target.
/// All paths are horizontal with zero Doppler.
pub fn draw_scenario_clusters<R: Rng + ?Sized>(
    cfg: &ScenarioStatsConfig,
    scenario: Scenario,
    height_m: u32,
    rng: &mut R,
) -> Result<DrawnChannel> {
    let row = cfg.get(scenario, height_m)?;
    let dominant_azimuth = rng.random::<f64>() * 2.0 * PI;

    let mut clusters = Vec::new();
    if rng.random::<f64>() < row.r2 {
        let single_path = if row.r2 > 0.0 {
            (row.r1 / row.r2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let num_paths = draw_path_count(single_path, rng).max(1);
        // a single-cluster channel that is not single-path has >= 2 paths
        let num_paths = if num_paths == 1 || single_path >= 1.0 {
            num_paths
        } else {
            num_paths.max(2)
        };
        clusters.push(ClusterDraft {
            delay_s: 0.0,
            azimuth_rad: dominant_azimuth,
            power: 1.0,
            num_paths,
        });
    } else {
        let count = row.cluster_number.normal().sample(rng).round().max(2.0) as usize;
        let k_db = row.cluster_k_db.normal().sample(rng);
        let raw: Vec<f64> = (1..count)
            .map(|_| {
                let offset_db = row.cluster_power_offset_db.normal().sample(rng).max(0.0);
                10f64.powf(-offset_db / 10.0)
            })
            .collect();
        let rescale = 10f64.powf(-k_db / 10.0) / raw.iter().sum::<f64>();
        clusters.push(ClusterDraft {
            delay_s: 0.0,
            azimuth_rad: dominant_azimuth,
            power: 1.0,
            num_paths: draw_path_count(row.r3, rng),
        });
        for p in raw {
            let delay_s = draw_delay_offset(
                row.cluster_delay_offset_log10_s,
                cfg.delay_offset_model,
                rng,
            );
            let offset = row
                .cluster_azimuth_offset_deg
                .normal()
                .sample(rng)
                .abs()
                .min(180.0);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            clusters.push(ClusterDraft {
                delay_s,
                azimuth_rad: wrap_two_pi(dominant_azimuth + sign * offset.to_radians()),
                power: p * rescale,
                num_paths: draw_path_count(row.r3, rng),
            });
        }
    }

    let mut paths = Vec::new();
    let mut cluster_ids = Vec::new();
    for (c, cluster) in clusters.iter().enumerate() {
        let delay_spread = 10f64.powf(row.cluster_delay_spread_log10_s.normal().sample(rng));
        let azimuth_spread = 10f64
            .powf(row.cluster_azimuth_spread_log10_deg.normal().sample(rng))
            .to_radians();
        let excess = Exp::new(1.0 / delay_spread).expect("positive spread");
        let scatter = Normal::new(0.0, azimuth_spread).expect("finite spread");
        let amplitude = (cluster.power / cluster.num_paths as f64).sqrt();
        for i in 0..cluster.num_paths {
            let (delay_s, azimuth_rad) = if i == 0 {
                (cluster.delay_s, cluster.azimuth_rad)
            } else {
                (
                    cluster.delay_s + excess.sample(rng),
                    wrap_two_pi(cluster.azimuth_rad + scatter.sample(rng)),
                )
            };
            let phase = rng.random::<f64>() * 2.0 * PI;
            paths.push(PathComponent::new(
                Complex64::from_polar(amplitude, phase),
                delay_s,
                azimuth_rad,
            ));
            cluster_ids.push(c);
        }
    }

    let target = 10f64.powf(row.composite_delay_spread_log10_s.normal().sample(rng));
    if paths.len() > 1 {
        let current = rms_delay_spread(&paths);
        if current > 0.0 {
            let factor = target / current;
            for p in &mut paths {
                p.delay_s *= factor;
            }
        }
    }

    Ok(DrawnChannel { paths, cluster_ids })
}

/// Path list of one random channel; see [`draw_scenario_clusters`].
pub fn draw_scenario_channel<R: Rng + ?Sized>(
    cfg: &ScenarioStatsConfig,
    scenario: Scenario,
    height_m: u32,
    rng: &mut R,
) -> Result<Vec<PathComponent>> {
    draw_scenario_clusters(cfg, scenario, height_m, rng).map(|d| d.paths)
}
