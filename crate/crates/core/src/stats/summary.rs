use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ChannelStats, Metric};
use crate::error::{Error, Result};
use crate::synth::DelayOffsetModel;

/// Row key of a summary: scenario name and height.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnsembleLabel {
    pub scenario: String,
    pub height_m: u32,
}

impl EnsembleLabel {
    pub fn new(scenario: impl Into<String>, height_m: u32) -> Self {
        Self {
            scenario: scenario.into(),
            height_m,
        }
    }
}

/// Box-plot statistics: quartiles (linear interpolation between
/// `(i − 0.5)/n` plotting positions), whiskers at the most extreme samples
/// within 1.5 IQR of the box, and the number of samples beyond them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: usize,
}

impl BoxStats {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q25 = percentile(&sorted, 25.0);
        let median = percentile(&sorted, 50.0);
        let q75 = percentile(&sorted, 75.0);
        let iqr = q75 - q25;
        let (lo, hi) = (q25 - 1.5 * iqr, q75 + 1.5 * iqr);
        let inside: Vec<f64> = sorted
            .iter()
            .copied()
            .filter(|v| (lo..=hi).contains(v))
            .collect();
        Some(Self {
            q25,
            median,
            q75,
            whisker_low: inside.first().copied().unwrap_or(q25),
            whisker_high: inside.last().copied().unwrap_or(q75),
            outliers: sorted.len() - inside.len(),
        })
    }
}

/// Percentile `p ∈ [0, 100]` of ascending `sorted` samples: sample `i`
/// (0-based) sits at `100·(i + 0.5)/n`, values in between are linearly
/// interpolated and values outside are clamped to the extremes.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of an empty sample");
    let pos = p / 100.0 * n as f64 - 0.5;
    if pos <= 0.0 {
        return sorted[0];
    }
    if pos >= (n - 1) as f64 {
        return sorted[n - 1];
    }
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = if samples.len() > 1 {
        (samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Distribution of one metric over an ensemble. `mean`/`std` are absent
/// when there are no samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub box_stats: Option<BoxStats>,
}

impl MetricSummary {
    /// Sample mean and (n − 1) standard deviation of `samples`.
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::empty();
        }
        let (mean, std) = mean_std(samples);
        Self {
            count: samples.len(),
            mean: Some(mean),
            std: Some(std),
            box_stats: BoxStats::from_samples(samples),
        }
    }

    pub fn empty() -> Self {
        Self {
            count: 0,
            mean: None,
            std: None,
            box_stats: None,
        }
    }

    fn ratio(value: f64, count: usize) -> Self {
        Self {
            count,
            mean: (count > 0).then_some(value),
            std: (count > 0).then_some(0.0),
            box_stats: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: EnsembleLabel,
    pub num_channels: usize,
    pub num_clusters: usize,
    pub metrics: BTreeMap<Metric, MetricSummary>,
}

impl SummaryRow {
    pub fn get(&self, metric: Metric) -> &MetricSummary {
        &self.metrics[&metric]
    }

    pub fn r1(&self) -> f64 {
        self.get(Metric::R1).mean.unwrap_or(f64::NAN)
    }

    pub fn r2(&self) -> f64 {
        self.get(Metric::R2).mean.unwrap_or(f64::NAN)
    }

    pub fn r3(&self) -> f64 {
        self.get(Metric::R3).mean.unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn row(&self, label: &EnsembleLabel) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| &r.label == label)
    }

    /// Human-readable table: one block per scenario, one column per height,
    /// `mean, std` cells.
    pub fn to_text(&self) -> String {
        let mut by_scenario: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
        for r in &self.rows {
            by_scenario
                .entry(r.label.scenario.as_str())
                .or_default()
                .push(r);
        }
        let order = [
            Metric::CompositeDelaySpread,
            Metric::CompositeAzimuthSpread,
            Metric::ClusterNumber,
            Metric::ClusterK,
            Metric::ClusterAzimuthSpread,
            Metric::ClusterDelaySpread,
            Metric::ClusterDelayOffset,
            Metric::ClusterAzimuthOffset,
            Metric::ClusterPowerOffset,
            Metric::R1,
            Metric::R2,
            Metric::R3,
        ];
        let title_width = order.iter().map(|m| m.title().len()).max().unwrap_or(0);
        let cell = 14;
        let mut out = String::new();
        for (scenario, mut rows) in by_scenario {
            rows.sort_by_key(|r| r.label.height_m);
            let _ = write!(out, "{:<title_width$}", scenario);
            for r in &rows {
                let _ = write!(out, " {:>cell$}", format!("{} m", r.label.height_m));
            }
            out.push('\n');
            for metric in order {
                let _ = write!(out, "{:<title_width$}", metric.title());
                for r in &rows {
                    let s = r.get(metric);
                    let text = match (s.mean, s.std, metric) {
                        (Some(m), _, Metric::R1 | Metric::R2 | Metric::R3) => format!("{m:.2}"),
                        (Some(m), Some(sd), _) => format!("{m:.2}, {sd:.2}"),
                        _ => "-".to_string(),
                    };
                    let _ = write!(out, " {text:>cell$}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// Per-metric samples of an ensemble, before aggregation.
///
/// Log-scaled metrics only take positive values (zero spreads of single-path
/// channels and clusters are left out); the cluster number and K come from
/// multi-cluster channels only.
pub(crate) fn metric_samples(stats: &[ChannelStats], metric: Metric) -> Vec<f64> {
    let positive_log10 = |v: f64| (v > 0.0 && v.is_finite()).then(|| v.log10());
    let multi_path_clusters = || {
        stats
            .iter()
            .flat_map(|s| s.clusters.iter().filter(|c| c.num_paths > 1))
    };
    match metric {
        Metric::R1 | Metric::R2 | Metric::R3 => Vec::new(),
        Metric::CompositeDelaySpread => stats
            .iter()
            .filter_map(|s| positive_log10(s.composite_delay_spread_s))
            .collect(),
        Metric::CompositeAzimuthSpread => stats
            .iter()
            .filter_map(|s| positive_log10(s.composite_azimuth_spread_deg))
            .collect(),
        Metric::ClusterNumber => stats
            .iter()
            .filter(|s| s.cluster_count > 1)
            .map(|s| s.cluster_count as f64)
            .collect(),
        Metric::ClusterK => stats
            .iter()
            .filter_map(|s| s.cluster_k_db)
            .filter(|k| k.is_finite())
            .collect(),
        Metric::ClusterAzimuthSpread => multi_path_clusters()
            .filter_map(|c| positive_log10(c.azimuth_spread_deg))
            .collect(),
        Metric::ClusterDelaySpread => multi_path_clusters()
            .filter_map(|c| positive_log10(c.delay_spread_s))
            .collect(),
        Metric::ClusterDelayOffset => stats
            .iter()
            .flat_map(|s| s.delay_offsets_s.iter())
            .filter_map(|&o| positive_log10(o.abs()))
            .collect(),
        Metric::ClusterAzimuthOffset => stats
            .iter()
            .flat_map(|s| s.azimuth_offsets_deg.iter().copied())
            .filter(|v| v.is_finite())
            .collect(),
        Metric::ClusterPowerOffset => stats
            .iter()
            .flat_map(|s| s.power_offsets_db.iter().copied())
            .filter(|v| v.is_finite())
            .collect(),
    }
}

/// [`ensemble_summary_with`] reading delay offsets as linear moments.
pub fn ensemble_summary(stats: &[ChannelStats], label: &EnsembleLabel) -> Result<SummaryRow> {
    ensemble_summary_with(stats, label, DelayOffsetModel::default())
}

/// Aggregates per-channel statistics into one summary row.
///
/// Ratios: `r1` = single-path channels / channels, `r2` = single-cluster
/// channels / channels, `r3` = single-path clusters / clusters. Delay
/// offsets are summarized to match `delay_offset_model`: with
/// [`DelayOffsetModel::LinearMoments`] the mean and std are `log10` of the
/// linear sample mean and std of `|τ_o|`; otherwise they are the moments of
/// `log10|τ_o|`. Box statistics always use `log10|τ_o|`.
pub fn ensemble_summary_with(
    stats: &[ChannelStats],
    label: &EnsembleLabel,
    delay_offset_model: DelayOffsetModel,
) -> Result<SummaryRow> {
    if stats.is_empty() {
        return Err(Error::invalid("cannot summarize an empty ensemble"));
    }
    let n = stats.len();
    let num_clusters: usize = stats.iter().map(|s| s.clusters.len()).sum();
    let single_path = stats.iter().filter(|s| s.single_path).count();
    let single_cluster = stats.iter().filter(|s| s.single_cluster).count();
    let single_path_clusters: usize = stats
        .iter()
        .map(ChannelStats::num_single_path_clusters)
        .sum();

    let mut metrics = BTreeMap::new();
    metrics.insert(
        Metric::R1,
        MetricSummary::ratio(single_path as f64 / n as f64, n),
    );
    metrics.insert(
        Metric::R2,
        MetricSummary::ratio(single_cluster as f64 / n as f64, n),
    );
    let r3 = if num_clusters > 0 {
        single_path_clusters as f64 / num_clusters as f64
    } else {
        0.0
    };
    metrics.insert(Metric::R3, MetricSummary::ratio(r3, num_clusters));
    for metric in Metric::SAMPLED {
        let samples = metric_samples(stats, metric);
        let mut summary = MetricSummary::from_samples(&samples);
        if metric == Metric::ClusterDelayOffset
            && delay_offset_model == DelayOffsetModel::LinearMoments
            && !samples.is_empty()
        {
            let linear: Vec<f64> = samples.iter().map(|v| 10f64.powf(*v)).collect();
            let (mean, std) = mean_std(&linear);
            summary.mean = Some(mean.log10());
            summary.std = Some(std.log10());
        }
        metrics.insert(metric, summary);
    }
    Ok(SummaryRow {
        label: label.clone(),
        num_channels: n,
        num_clusters,
        metrics,
    })
}
