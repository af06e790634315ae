//! Comparison of configured, ground-truth and recovered ensemble statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{ChannelStats, Metric, SummaryRow};
use crate::synth::ScenarioStats;

type RowValue = fn(&SummaryRow) -> f64;
type ChannelValue = fn(&ChannelStats) -> f64;

/// One compared quantity. `abs_error` and `rel_error` compare the recovered
/// value against the ground truth of the same channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub quantity: String,
    pub statistic: String,
    pub configured: Option<f64>,
    pub truth: Option<f64>,
    pub recovered: Option<f64>,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
}

impl ReportRow {
    fn new(
        quantity: &str,
        statistic: &str,
        configured: Option<f64>,
        truth: Option<f64>,
        recovered: Option<f64>,
    ) -> Self {
        let abs_error = truth.zip(recovered).map(|(t, r)| r - t);
        let rel_error = truth
            .zip(abs_error)
            .and_then(|(t, e)| (t != 0.0).then(|| e / t.abs()));
        Self {
            quantity: quantity.to_string(),
            statistic: statistic.to_string(),
            configured,
            truth,
            recovered,
            abs_error,
            rel_error,
        }
    }
}

fn linear_mean(stats: &[ChannelStats], f: impl Fn(&ChannelStats) -> f64) -> Option<f64> {
    (!stats.is_empty()).then(|| stats.iter().map(f).sum::<f64>() / stats.len() as f64)
}

/// Builds the comparison table: mean and std of every sampled metric, the
/// three ratios, and linear means of the composite spreads and cluster count
/// over all channels.
pub fn roundtrip_report(
    configured: Option<&ScenarioStats>,
    truth: &SummaryRow,
    recovered: &SummaryRow,
    truth_stats: &[ChannelStats],
    recovered_stats: &[ChannelStats],
) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for metric in Metric::SAMPLED {
        let cfg = configured.map(|c| c.get(metric));
        let (t, r) = (truth.get(metric), recovered.get(metric));
        rows.push(ReportRow::new(
            metric.key(),
            "mean",
            cfg.map(|c| c.mean),
            t.mean,
            r.mean,
        ));
        rows.push(ReportRow::new(
            metric.key(),
            "std",
            cfg.map(|c| c.std),
            t.std,
            r.std,
        ));
    }
    let ratios: [(Metric, RowValue); 3] = [
        (Metric::R1, SummaryRow::r1),
        (Metric::R2, SummaryRow::r2),
        (Metric::R3, SummaryRow::r3),
    ];
    for (metric, value) in ratios {
        let cfg = configured.map(|c| c.get(metric).mean);
        rows.push(ReportRow::new(
            metric.key(),
            "value",
            cfg,
            Some(value(truth)),
            Some(value(recovered)),
        ));
    }
    let linear: [(&str, ChannelValue); 3] = [
        ("composite_delay_spread_s", |s| s.composite_delay_spread_s),
        ("composite_azimuth_spread_deg", |s| {
            s.composite_azimuth_spread_deg
        }),
        ("cluster_count", |s| s.cluster_count as f64),
    ];
    for (name, f) in linear {
        rows.push(ReportRow::new(
            name,
            "linear_mean",
            None,
            linear_mean(truth_stats, f),
            linear_mean(recovered_stats, f),
        ));
    }
    rows
}

pub(crate) fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
