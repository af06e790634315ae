//! Composite and cluster-level channel statistics and their ensemble
//! summaries.
//!
//! Spreads are power-weighted RMS values: the delay spread is the standard
//! deviation of the delays, the azimuth spread is the circular spread
//! `√(−2·ln|Σ p_ℓ e^{jφ_ℓ} / Σ p_ℓ|)` (radians, natural log), reported in
//! degrees.

pub mod io;
mod metric;
mod summary;

use serde::{Deserialize, Serialize};

use crate::channel::wrap_pi;
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::hrpe::ChannelEstimate;

pub use metric::Metric;
pub use summary::{
    ensemble_summary, ensemble_summary_with, percentile, BoxStats, EnsembleLabel, MetricSummary,
    SummaryRow, SummaryTable,
};

/// Power-weighted RMS delay spread, computed around the mean delay.
pub fn delay_spread(powers: &[f64], delays_s: &[f64]) -> Result<f64> {
    check_weights(powers, delays_s.len())?;
    let total: f64 = powers.iter().sum();
    let mean = powers.iter().zip(delays_s).map(|(p, t)| p * t).sum::<f64>() / total;
    let var = powers
        .iter()
        .zip(delays_s)
        .map(|(p, t)| p * (t - mean) * (t - mean))
        .sum::<f64>()
        / total;
    Ok(var.max(0.0).sqrt())
}

/// Circular RMS azimuth spread in degrees. Evaluated as `√(−ln(1 − D))`
/// with `1 − D = |Σ p e^{jφ}|² / P²` expanded pairwise, which stays
/// accurate for small spreads.
pub fn azimuth_spread_deg(powers: &[f64], azimuths_rad: &[f64]) -> Result<f64> {
    check_weights(powers, azimuths_rad.len())?;
    let total: f64 = powers.iter().sum();
    let mut d = 0.0;
    for i in 0..powers.len() {
        for j in (i + 1)..powers.len() {
            let half = 0.5 * (azimuths_rad[i] - azimuths_rad[j]);
            d += 2.0 * powers[i] * powers[j] * 2.0 * half.sin().powi(2);
        }
    }
    let d = (d / (total * total)).clamp(0.0, 1.0);
    Ok((-(-d).ln_1p()).sqrt().to_degrees())
}

fn check_weights(powers: &[f64], len: usize) -> Result<()> {
    if powers.is_empty() {
        return Err(Error::invalid("spreads need at least one path"));
    }
    if powers.len() != len {
        return Err(Error::invalid("powers and parameters differ in length"));
    }
    if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || !(powers.iter().sum::<f64>() > 0.0) {
        return Err(Error::invalid(
            "path powers must be finite, non-negative and not all zero",
        ));
    }
    Ok(())
}

/// Composite `(σ_τ [s], σ_φ [deg])` over all paths of the estimate.
pub fn composite_spreads(estimate: &ChannelEstimate) -> Result<(f64, f64)> {
    if estimate.is_empty() {
        return Err(Error::invalid(
            "cannot compute spreads of an empty estimate",
        ));
    }
    let powers: Vec<f64> = estimate.paths.iter().map(|p| p.power).collect();
    let delays: Vec<f64> = estimate.paths.iter().map(|p| p.delay_s).collect();
    let azimuths: Vec<f64> = estimate.paths.iter().map(|p| p.azimuth_rad).collect();
    Ok((
        delay_spread(&powers, &delays)?,
        azimuth_spread_deg(&powers, &azimuths)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub num_paths: usize,
    pub power: f64,
    pub delay_spread_s: f64,
    pub azimuth_spread_deg: f64,
}

/// Statistics of one channel. Offsets are relative to the dominant
/// (strongest) cluster and listed for the other clusters in power order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub num_paths: usize,
    pub composite_delay_spread_s: f64,
    pub composite_azimuth_spread_deg: f64,
    pub cluster_count: usize,
    /// Dominant-cluster power over the power of all other clusters, dB.
    /// Absent for single-cluster channels and when saturated.
    pub cluster_k_db: Option<f64>,
    /// The other clusters carry no (representable) power.
    pub k_saturated: bool,
    pub clusters: Vec<ClusterStats>,
    /// Signed `μ_τ,c − μ_τ,1`.
    pub delay_offsets_s: Vec<f64>,
    /// Circular distance to the dominant centroid azimuth, in `[0, 180]`.
    pub azimuth_offsets_deg: Vec<f64>,
    /// `10·log10(p_1 / p_c) ≥ 0`.
    pub power_offsets_db: Vec<f64>,
    pub single_path: bool,
    pub single_cluster: bool,
}

impl ChannelStats {
    pub fn num_single_path_clusters(&self) -> usize {
        self.clusters.iter().filter(|c| c.num_paths == 1).count()
    }
}

/// Cluster power ratio in dB and the saturation flag.
pub fn cluster_power_ratio_db(cluster_powers: &[f64]) -> (Option<f64>, bool) {
    if cluster_powers.len() < 2 {
        return (None, false);
    }
    let dominant = cluster_powers[0];
    let rest: f64 = cluster_powers[1..].iter().sum();
    let ratio = dominant / rest;
    if rest > 0.0 && ratio.is_finite() && ratio > 0.0 {
        (Some(10.0 * ratio.log10()), false)
    } else {
        (None, true)
    }
}

/// Composite and cluster-level statistics of a clustered estimate.
pub fn cluster_level_stats(
    clustering: &Clustering,
    estimate: &ChannelEstimate,
) -> Result<ChannelStats> {
    clustering.check_partition(estimate.len())?;
    let (composite_delay_spread_s, composite_azimuth_spread_deg) = composite_spreads(estimate)?;
    let paths = &estimate.paths;
    let clusters = clustering
        .clusters
        .iter()
        .map(|c| {
            let powers: Vec<f64> = c.member_indices.iter().map(|&i| paths[i].power).collect();
            let delays: Vec<f64> = c.member_indices.iter().map(|&i| paths[i].delay_s).collect();
            let azimuths: Vec<f64> = c
                .member_indices
                .iter()
                .map(|&i| paths[i].azimuth_rad)
                .collect();
            let power: f64 = powers.iter().sum();
            let (delay_spread_s, azimuth_spread_deg) = if c.len() > 1 && power > 0.0 {
                (
                    delay_spread(&powers, &delays)?,
                    azimuth_spread_deg(&powers, &azimuths)?,
                )
            } else {
                (0.0, 0.0)
            };
            if (power - c.power).abs() > 1e-12 * power.max(f64::MIN_POSITIVE) {
                return Err(Error::invalid(
                    "cluster power does not match its member paths",
                ));
            }
            Ok(ClusterStats {
                num_paths: c.len(),
                power,
                delay_spread_s,
                azimuth_spread_deg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let powers = clustering.powers();
    let (cluster_k_db, k_saturated) = cluster_power_ratio_db(&powers);
    let dominant = &clustering.clusters[0];
    let others = &clustering.clusters[1..];
    Ok(ChannelStats {
        num_paths: estimate.len(),
        composite_delay_spread_s,
        composite_azimuth_spread_deg,
        cluster_count: clustering.num_clusters(),
        cluster_k_db,
        k_saturated,
        delay_offsets_s: others
            .iter()
            .map(|c| c.centroid_delay_s - dominant.centroid_delay_s)
            .collect(),
        azimuth_offsets_deg: others
            .iter()
            .map(|c| {
                wrap_pi(c.centroid_azimuth_rad - dominant.centroid_azimuth_rad)
                    .abs()
                    .to_degrees()
            })
            .collect(),
        power_offsets_db: others
            .iter()
            .map(|c| 10.0 * (dominant.power / c.power).log10())
            .collect(),
        clusters,
        single_path: estimate.len() == 1,
        single_cluster: clustering.num_clusters() == 1,
    })
}
