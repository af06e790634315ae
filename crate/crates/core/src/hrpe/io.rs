//! Estimate files: one CSV row per path plus a JSON sidecar with the
//! per-antenna amplitudes and the fit diagnostics.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{azimuth_deg, ChannelEstimate, ConvergenceInfo, PathEstimate};
use crate::channel::io::{read_json, write_json};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub path_id: usize,
    pub power_db: f64,
    pub delay_s: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub doppler_hz: f64,
    pub re_alpha: f64,
    pub im_alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSidecar {
    pub noise_floor: f64,
    pub model_order: usize,
    pub iterations: usize,
    pub residual_power: f64,
    /// `per_antenna_amplitudes[path_id]`, as `[re, im]` pairs.
    pub per_antenna_amplitudes: Vec<Vec<[f64; 2]>>,
}

/// Sidecar path next to an estimate CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn estimate_rows(estimate: &ChannelEstimate) -> Vec<EstimateRow> {
    estimate
        .paths
        .iter()
        .enumerate()
        .map(|(i, p)| EstimateRow {
            path_id: i,
            power_db: 10.0 * p.power.log10(),
            delay_s: p.delay_s,
            azimuth_deg: azimuth_deg(p.azimuth_rad),
            elevation_deg: p.elevation_rad.to_degrees(),
            doppler_hz: p.doppler_hz,
            re_alpha: p.amplitude.re,
            im_alpha: p.amplitude.im,
        })
        .collect()
}

/// Writes `<csv_path>` and its sidecar.
pub fn write_estimate(csv_path: &Path, estimate: &ChannelEstimate) -> Result<()> {
    let mut writer = csv::Writer::from_path(csv_path).map_err(|e| Error::csv(csv_path, e))?;
    for row in estimate_rows(estimate) {
        writer.serialize(row).map_err(|e| Error::csv(csv_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(csv_path, e))?;
    let sidecar = EstimateSidecar {
        noise_floor: estimate.noise_floor,
        model_order: estimate.model_order,
        iterations: estimate.convergence.iterations,
        residual_power: estimate.convergence.residual_power,
        per_antenna_amplitudes: estimate
            .paths
            .iter()
            .map(|p| {
                p.per_antenna_amplitudes
                    .iter()
                    .map(|a| [a.re, a.im])
                    .collect()
            })
            .collect(),
    };
    write_json(&sidecar_path(csv_path), &sidecar)
}

/// Reads an estimate written by [`write_estimate`]. The sidecar is
/// optional; without it the per-antenna amplitudes are left empty.
pub fn read_estimate(csv_path: &Path) -> Result<ChannelEstimate> {
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| Error::csv(csv_path, e))?;
    let rows = reader
        .deserialize::<EstimateRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(csv_path, e))?;
    let side_path = sidecar_path(csv_path);
    let sidecar: Option<EstimateSidecar> = if side_path.exists() {
        Some(read_json(&side_path)?)
    } else {
        None
    };
    if let Some(s) = &sidecar {
        if s.model_order != rows.len() || s.per_antenna_amplitudes.len() != rows.len() {
            return Err(Error::validation(
                "model_order",
                "sidecar does not match the CSV rows",
            ));
        }
    }
    let mut paths = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.path_id != i {
            return Err(Error::validation(
                "path_id",
                format!("expected {i}, found {}", row.path_id),
            ));
        }
        let amplitude = Complex64::new(row.re_alpha, row.im_alpha);
        let per_antenna_amplitudes = sidecar
            .as_ref()
            .map(|s| {
                s.per_antenna_amplitudes[i]
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .unwrap_or_default();
        paths.push(PathEstimate {
            amplitude,
            per_antenna_amplitudes,
            delay_s: row.delay_s,
            doppler_hz: row.doppler_hz,
            azimuth_rad: row.azimuth_deg.to_radians(),
            elevation_rad: row.elevation_deg.to_radians(),
            power: amplitude.norm_sqr(),
        });
    }
    let (noise_floor, convergence) = sidecar
        .map(|s| {
            (
                s.noise_floor,
                ConvergenceInfo {
                    iterations: s.iterations,
                    residual_power: s.residual_power,
                },
            )
        })
        .unwrap_or_default();
    let estimate = ChannelEstimate {
        model_order: paths.len(),
        paths,
        noise_floor,
        convergence,
    };
    estimate.validate()?;
    Ok(estimate)
}
