use std::fmt;

use serde::{Deserialize, Serialize};

/// Channel statistics tracked per (scenario, height), in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    R1,
    R2,
    R3,
    CompositeDelaySpread,
    CompositeAzimuthSpread,
    ClusterNumber,
    ClusterK,
    ClusterAzimuthSpread,
    ClusterDelaySpread,
    ClusterDelayOffset,
    ClusterAzimuthOffset,
    ClusterPowerOffset,
}

impl Metric {
    pub const ALL: [Metric; 12] = [
        Metric::R1,
        Metric::R2,
        Metric::R3,
        Metric::CompositeDelaySpread,
        Metric::CompositeAzimuthSpread,
        Metric::ClusterNumber,
        Metric::ClusterK,
        Metric::ClusterAzimuthSpread,
        Metric::ClusterDelaySpread,
        Metric::ClusterDelayOffset,
        Metric::ClusterAzimuthOffset,
        Metric::ClusterPowerOffset,
    ];

    /// Sample metrics, i.e. everything except the three ratios.
    pub const SAMPLED: [Metric; 9] = [
        Metric::CompositeDelaySpread,
        Metric::CompositeAzimuthSpread,
        Metric::ClusterNumber,
        Metric::ClusterK,
        Metric::ClusterAzimuthSpread,
        Metric::ClusterDelaySpread,
        Metric::ClusterDelayOffset,
        Metric::ClusterAzimuthOffset,
        Metric::ClusterPowerOffset,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Metric::R1 => "r1",
            Metric::R2 => "r2",
            Metric::R3 => "r3",
            Metric::CompositeDelaySpread => "composite_delay_spread_log10_s",
            Metric::CompositeAzimuthSpread => "composite_azimuth_spread_log10_deg",
            Metric::ClusterNumber => "cluster_number",
            Metric::ClusterK => "cluster_k_db",
            Metric::ClusterAzimuthSpread => "cluster_azimuth_spread_log10_deg",
            Metric::ClusterDelaySpread => "cluster_delay_spread_log10_s",
            Metric::ClusterDelayOffset => "cluster_delay_offset_log10_s",
            Metric::ClusterAzimuthOffset => "cluster_azimuth_offset_deg",
            Metric::ClusterPowerOffset => "cluster_power_offset_db",
        }
    }

    pub fn from_key(key: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.key() == key)
    }

    /// Column heading used in the text table.
    pub fn title(&self) -> &'static str {
        match self {
            Metric::R1 => "r1",
            Metric::R2 => "r2",
            Metric::R3 => "r3",
            Metric::CompositeDelaySpread => "Composite DS [log10(s)]",
            Metric::CompositeAzimuthSpread => "Composite AS [log10(deg)]",
            Metric::ClusterNumber => "Cluster number",
            Metric::ClusterK => "Cluster K [dB]",
            Metric::ClusterAzimuthSpread => "Cluster AS [log10(deg)]",
            Metric::ClusterDelaySpread => "Cluster DS [log10(s)]",
            Metric::ClusterDelayOffset => "Delay offset [log10(s)]",
            Metric::ClusterAzimuthOffset => "Azimuth offset [deg]",
            Metric::ClusterPowerOffset => "Power offset [dB]",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}
