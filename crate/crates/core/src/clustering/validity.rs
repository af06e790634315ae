use serde::{Deserialize, Serialize};

use super::{centroid_point, mcd_points, Cluster, McdConfig, McdPoint};
use crate::hrpe::PathEstimate;

/// Cluster validity indices of a partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityScores {
    /// Calinski–Harabasz score (higher is better); `inf` for compact
    /// clusters with zero internal dispersion.
    #[serde(with = "extended_float")]
    pub ch: f64,
    /// Davies–Bouldin score (lower is better).
    #[serde(with = "extended_float")]
    pub db: f64,
}

impl ValidityScores {
    pub(crate) fn compute(paths: &[PathEstimate], clusters: &[Cluster], cfg: &McdConfig) -> Self {
        Self {
            ch: calinski_harabasz(paths, clusters, cfg),
            db: davies_bouldin(paths, clusters, cfg),
        }
    }
}

/// Power-weighted Calinski–Harabasz score with MCD dispersions:
/// `(B/(C−1)) / (W/(n−C))`, where `B = Σ_c p_c·d(μ_c, μ)` and
/// `W = Σ_c Σ_{ℓ∈c} p_ℓ·d(x_ℓ, μ_c)`. Zero when `C = 1` or `C = n`.
pub fn calinski_harabasz(paths: &[PathEstimate], clusters: &[Cluster], cfg: &McdConfig) -> f64 {
    let n = paths.len();
    let c = clusters.len();
    if c <= 1 || c >= n {
        return 0.0;
    }
    let all: Vec<usize> = (0..n).collect();
    let Ok(global) = centroid_point(paths, &all) else {
        return 0.0;
    };
    let between: f64 = clusters
        .iter()
        .map(|cl| cl.power * mcd_points(&cl.centroid(), &global, cfg))
        .sum();
    let within: f64 = clusters
        .iter()
        .map(|cl| {
            let centroid = cl.centroid();
            cl.member_indices
                .iter()
                .map(|&i| paths[i].power * mcd_points(&McdPoint::from(&paths[i]), &centroid, cfg))
                .sum::<f64>()
        })
        .sum();
    let between = between / (c - 1) as f64;
    let within = within / (n - c) as f64;
    if within > 0.0 {
        between / within
    } else if between > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Davies–Bouldin score with power-weighted mean member-to-centroid MCD as
/// the cluster scatter and centroid MCD as the separation. Zero for a
/// single cluster.
pub fn davies_bouldin(paths: &[PathEstimate], clusters: &[Cluster], cfg: &McdConfig) -> f64 {
    let c = clusters.len();
    if c <= 1 {
        return 0.0;
    }
    let scatter: Vec<f64> = clusters
        .iter()
        .map(|cl| {
            let centroid = cl.centroid();
            let weighted: f64 = cl
                .member_indices
                .iter()
                .map(|&i| paths[i].power * mcd_points(&McdPoint::from(&paths[i]), &centroid, cfg))
                .sum();
            if cl.power > 0.0 {
                weighted / cl.power
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = (0..c)
        .map(|i| {
            (0..c)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = mcd_points(&clusters[i].centroid(), &clusters[j].centroid(), cfg);
                    let s = scatter[i] + scatter[j];
                    if d > 0.0 {
                        s / d
                    } else if s > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        })
        .sum();
    total / c as f64
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`
/// (plain JSON numbers otherwise).
pub(crate) mod extended_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => t
                .parse::<f64>()
                .map_err(|_| serde::de::Error::custom(format!("not a number: {t:?}"))),
        }
    }
}
