//! Clustering files: a `path_id,cluster_id` CSV plus a JSON sidecar with
//! the centroids, powers, validity scores and the threshold.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Clustering, McdConfig, ValidityScores};
use crate::channel::io::{read_json, write_json};
use crate::error::{Error, Result};
use crate::hrpe::{azimuth_deg, ChannelEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub path_id: usize,
    pub cluster_id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub centroid_delay_s: f64,
    pub centroid_azimuth_deg: f64,
    pub power: f64,
    pub num_paths: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSidecar {
    pub threshold: f64,
    pub validity: ValidityScores,
    pub sweeps: usize,
    pub converged: bool,
    pub clusters: Vec<ClusterSummary>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_clustering(csv_path: &Path, clustering: &Clustering) -> Result<()> {
    let mut writer = csv::Writer::from_path(csv_path).map_err(|e| Error::csv(csv_path, e))?;
    for (path_id, cluster_id) in clustering.labels().into_iter().enumerate() {
        writer
            .serialize(AssignmentRow {
                path_id,
                cluster_id,
            })
            .map_err(|e| Error::csv(csv_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(csv_path, e))?;
    let sidecar = ClusteringSidecar {
        threshold: clustering.threshold_used,
        validity: clustering.validity,
        sweeps: clustering.sweeps,
        converged: clustering.converged,
        clusters: clustering
            .clusters
            .iter()
            .enumerate()
            .map(|(cluster_id, c)| ClusterSummary {
                cluster_id,
                centroid_delay_s: c.centroid_delay_s,
                centroid_azimuth_deg: azimuth_deg(c.centroid_azimuth_rad),
                power: c.power,
                num_paths: c.len(),
            })
            .collect(),
    };
    write_json(&sidecar_path(csv_path), &sidecar)
}

/// Reads the assignment CSV and rebuilds the clustering of `estimate`
/// (centroids and scores are recomputed from the paths; threshold and
/// convergence flags come from the sidecar when present).
pub fn read_clustering(
    csv_path: &Path,
    estimate: &ChannelEstimate,
    cfg: &McdConfig,
) -> Result<Clustering> {
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| Error::csv(csv_path, e))?;
    let rows = reader
        .deserialize::<AssignmentRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(csv_path, e))?;
    if rows.len() != estimate.len() {
        return Err(Error::validation(
            "path_id",
            format!("{} assignments for {} paths", rows.len(), estimate.len()),
        ));
    }
    let mut labels = vec![0; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        if row.path_id != i {
            return Err(Error::validation(
                "path_id",
                format!("expected {i}, found {}", row.path_id),
            ));
        }
        labels[i] = row.cluster_id;
    }
    let side = sidecar_path(csv_path);
    let sidecar: Option<ClusteringSidecar> = if side.exists() {
        Some(read_json(&side)?)
    } else {
        None
    };
    let threshold = sidecar.as_ref().map_or(f64::NAN, |s| s.threshold);
    let mut clustering = Clustering::from_labels(estimate, &labels, threshold, cfg)?;
    if let Some(s) = sidecar {
        clustering.sweeps = s.sweeps;
        clustering.converged = s.converged;
    }
    Ok(clustering)
}
