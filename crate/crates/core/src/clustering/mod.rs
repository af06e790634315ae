//! Multipath component distance (MCD) and threshold clustering.
//!
//! Paths are grouped by [`cluster_with_threshold`] for a fixed MCD
//! threshold `η`; [`select_optimal_clustering`] sweeps a grid of thresholds
//! and keeps the partition with the best power-weighted Calinski–Harabasz
//! score (Davies–Bouldin breaks ties).

mod algorithm;
pub mod io;
mod validity;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::wrap_two_pi;
use crate::error::{Error, Result};
use crate::hrpe::{ChannelEstimate, PathEstimate};

pub use algorithm::{cluster_with_threshold, select_optimal_clustering};
pub use validity::{calinski_harabasz, davies_bouldin, ValidityScores};

/// Delay scaling that makes a 2 µs split as distant as a 30° azimuth
/// split: `2 µs / sin 15°`.
pub const DEFAULT_TAU_ZETA_S: f64 = 7.727e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McdConfig {
    pub tau_zeta_s: f64,
    /// When false, elevations are taken as horizontal (`θ = π/2`).
    pub include_elevation: bool,
    /// Candidate thresholds, ascending.
    pub threshold_grid: Vec<f64>,
    pub max_sweep_iterations: usize,
    /// Threshold selection considers only partitions whose Davies–Bouldin
    /// score is within this factor of the best one; `None` ranks every
    /// multi-cluster partition by Calinski–Harabasz alone.
    pub db_preselect_factor: Option<f64>,
}

impl Default for McdConfig {
    fn default() -> Self {
        Self {
            tau_zeta_s: DEFAULT_TAU_ZETA_S,
            include_elevation: false,
            threshold_grid: geometric_grid(0.05, 0.6, 12),
            max_sweep_iterations: 50,
            db_preselect_factor: Some(3.0),
        }
    }
}

impl McdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_zeta_s > 0.0 && self.tau_zeta_s.is_finite()) {
            return Err(Error::validation("tau_zeta_s", "must be positive"));
        }
        if self.threshold_grid.is_empty() {
            return Err(Error::validation("threshold_grid", "must not be empty"));
        }
        if self
            .threshold_grid
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(Error::validation(
                "threshold_grid",
                "thresholds must be finite and >= 0",
            ));
        }
        if self.threshold_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "threshold_grid",
                "must be strictly ascending",
            ));
        }
        if let Some(f) = self.db_preselect_factor {
            if !(f >= 1.0) {
                return Err(Error::validation(
                    "db_preselect_factor",
                    "must be at least 1",
                ));
            }
        }
        if self.max_sweep_iterations == 0 {
            return Err(Error::validation(
                "max_sweep_iterations",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// `count` values from `first` to `last`, equally spaced in log scale.
pub fn geometric_grid(first: f64, last: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![first],
        _ => {
            let ratio = (last / first).powf(1.0 / (count - 1) as f64);
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        last
                    } else {
                        first * ratio.powi(i as i32)
                    }
                })
                .collect()
        }
    }
}

/// Location of a path or a cluster centroid in MCD space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McdPoint {
    pub delay_s: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

impl From<&PathEstimate> for McdPoint {
    fn from(p: &PathEstimate) -> Self {
        Self {
            delay_s: p.delay_s,
            azimuth_rad: p.azimuth_rad,
            elevation_rad: p.elevation_rad,
        }
    }
}

impl McdPoint {
    fn direction(&self, include_elevation: bool) -> [f64; 3] {
        let theta = if include_elevation {
            self.elevation_rad
        } else {
            FRAC_PI_2
        };
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = self.azimuth_rad.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// `√(MCD_Rx² + MCD_τ²)` between two locations.
pub fn mcd_points(a: &McdPoint, b: &McdPoint, cfg: &McdConfig) -> f64 {
    let (da, db) = (
        a.direction(cfg.include_elevation),
        b.direction(cfg.include_elevation),
    );
    let chord2: f64 = da.iter().zip(&db).map(|(x, y)| (x - y) * (x - y)).sum();
    let rx = 0.5 * chord2.sqrt();
    let tau = (a.delay_s - b.delay_s).abs() / cfg.tau_zeta_s;
    rx.hypot(tau)
}

/// Multipath component distance between two paths: half the chord between
/// their arrival directions combined with the delay difference scaled by
/// `τ_ζ`.
pub fn mcd(path_i: &PathEstimate, path_j: &PathEstimate, cfg: &McdConfig) -> f64 {
    mcd_points(&path_i.into(), &path_j.into(), cfg)
}

/// Power-weighted centroid `(μ_τ, μ_φ)` of the member paths: mean delay and
/// circular mean azimuth. Members with zero total power are weighted
/// equally.
pub fn cluster_centroid(paths: &[PathEstimate], member_indices: &[usize]) -> Result<(f64, f64)> {
    let point = centroid_point(paths, member_indices)?;
    Ok((point.delay_s, point.azimuth_rad))
}

pub(crate) fn centroid_point(paths: &[PathEstimate], members: &[usize]) -> Result<McdPoint> {
    if members.is_empty() {
        return Err(Error::invalid("a cluster needs at least one member"));
    }
    if let Some(&bad) = members.iter().find(|&&i| i >= paths.len()) {
        return Err(Error::invalid(format!("member index {bad} out of range")));
    }
    let total: f64 = members.iter().map(|&i| paths[i].power).sum();
    let weight = |i: usize| {
        if total > 0.0 {
            paths[i].power / total
        } else {
            1.0 / members.len() as f64
        }
    };
    if members.len() == 1 {
        let p = &paths[members[0]];
        return Ok(McdPoint {
            delay_s: p.delay_s,
            azimuth_rad: wrap_two_pi(p.azimuth_rad),
            elevation_rad: p.elevation_rad,
        });
    }
    let mut delay = 0.0;
    let mut elevation = 0.0;
    let mut phasor = Complex64::new(0.0, 0.0);
    for &i in members {
        let w = weight(i);
        delay += w * paths[i].delay_s;
        elevation += w * paths[i].elevation_rad;
        phasor += w * Complex64::from_polar(1.0, paths[i].azimuth_rad);
    }
    Ok(McdPoint {
        delay_s: delay,
        azimuth_rad: wrap_two_pi(phasor.arg()),
        elevation_rad: elevation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Indices into the estimate's path list, ascending.
    pub member_indices: Vec<usize>,
    pub centroid_delay_s: f64,
    pub centroid_azimuth_rad: f64,
    pub centroid_elevation_rad: f64,
    /// Sum of member path powers.
    pub power: f64,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }

    pub fn centroid(&self) -> McdPoint {
        McdPoint {
            delay_s: self.centroid_delay_s,
            azimuth_rad: self.centroid_azimuth_rad,
            elevation_rad: self.centroid_elevation_rad,
        }
    }

    fn from_members(paths: &[PathEstimate], mut member_indices: Vec<usize>) -> Result<Self> {
        member_indices.sort_unstable();
        let c = centroid_point(paths, &member_indices)?;
        Ok(Self {
            power: member_indices.iter().map(|&i| paths[i].power).sum(),
            member_indices,
            centroid_delay_s: c.delay_s,
            centroid_azimuth_rad: c.azimuth_rad,
            centroid_elevation_rad: c.elevation_rad,
        })
    }
}

/// A partition of an estimate's paths, strongest cluster first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub threshold_used: f64,
    pub validity: ValidityScores,
    /// Refinement sweeps performed.
    pub sweeps: usize,
    /// False when the refinement hit the sweep limit or revisited an
    /// earlier assignment without reaching a fixed point.
    pub converged: bool,
}

impl Clustering {
    /// Builds the clustering given by per-path `labels` (any integer ids).
    pub fn from_labels(
        estimate: &ChannelEstimate,
        labels: &[usize],
        threshold: f64,
        cfg: &McdConfig,
    ) -> Result<Self> {
        let paths = &estimate.paths;
        if labels.len() != paths.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} paths",
                labels.len(),
                paths.len()
            )));
        }
        if paths.is_empty() {
            return Err(Error::invalid("cannot cluster an empty estimate"));
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        let mut clusters = groups
            .into_values()
            .map(|members| Cluster::from_members(paths, members))
            .collect::<Result<Vec<_>>>()?;
        clusters.sort_by(|a, b| {
            b.power
                .total_cmp(&a.power)
                .then(a.member_indices[0].cmp(&b.member_indices[0]))
        });
        let validity = ValidityScores::compute(paths, &clusters, cfg);
        Ok(Self {
            clusters,
            threshold_used: threshold,
            validity,
            sweeps: 0,
            converged: true,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn num_paths(&self) -> usize {
        self.clusters.iter().map(Cluster::len).sum()
    }

    /// Cluster index (position in `clusters`) of every path.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![usize::MAX; self.num_paths()];
        for (c, cluster) in self.clusters.iter().enumerate() {
            for &i in &cluster.member_indices {
                if i < labels.len() {
                    labels[i] = c;
                }
            }
        }
        labels
    }

    pub fn powers(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.power).collect()
    }

    /// Checks that the clusters partition the `num_paths` path indices.
    pub fn check_partition(&self, num_paths: usize) -> Result<()> {
        let mut seen = vec![false; num_paths];
        for c in &self.clusters {
            if c.is_empty() {
                return Err(Error::invalid("empty cluster"));
            }
            for &i in &c.member_indices {
                if i >= num_paths || seen[i] {
                    return Err(Error::invalid(format!(
                        "path {i} is out of range or assigned twice"
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("some paths are not assigned to a cluster"));
        }
        Ok(())
    }
}
