//! Summary and per-channel statistics files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChannelStats, SummaryTable};
use crate::channel::io::{read_json, write_json};
use crate::error::{Error, Result};

/// One line of the long-format summary CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub scenario: String,
    pub height_m: u32,
    pub metric: String,
    pub statistic: String,
    /// Empty when the statistic is undefined (no samples).
    pub value: Option<f64>,
}

pub fn summary_records(table: &SummaryTable) -> Vec<SummaryRecord> {
    let mut out = Vec::new();
    for row in &table.rows {
        let mut push = |metric: &str, statistic: &str, value: Option<f64>| {
            out.push(SummaryRecord {
                scenario: row.label.scenario.clone(),
                height_m: row.label.height_m,
                metric: metric.to_string(),
                statistic: statistic.to_string(),
                value,
            })
        };
        push("channels", "count", Some(row.num_channels as f64));
        push("clusters", "count", Some(row.num_clusters as f64));
        for (metric, s) in &row.metrics {
            let key = metric.key();
            push(key, "count", Some(s.count as f64));
            push(key, "mean", s.mean);
            push(key, "std", s.std);
            if let Some(b) = &s.box_stats {
                push(key, "q25", Some(b.q25));
                push(key, "median", Some(b.median));
                push(key, "q75", Some(b.q75));
                push(key, "whisker_low", Some(b.whisker_low));
                push(key, "whisker_high", Some(b.whisker_high));
                push(key, "outliers", Some(b.outliers as f64));
            }
        }
    }
    out
}

pub fn write_summary_csv(path: &Path, table: &SummaryTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for record in summary_records(table) {
        writer.serialize(record).map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn write_summary_text(path: &Path, table: &SummaryTable) -> Result<()> {
    std::fs::write(path, table.to_text()).map_err(|e| Error::io(path, e))
}

pub fn write_channel_stats(path: &Path, stats: &[ChannelStats]) -> Result<()> {
    write_json(path, stats)
}

pub fn read_channel_stats(path: &Path) -> Result<Vec<ChannelStats>> {
    read_json(path)
}
