use std::collections::HashSet;

use super::{mcd_points, Cluster, Clustering, McdConfig, McdPoint};
use crate::error::{Error, Result};
use crate::hrpe::ChannelEstimate;

/// Threshold clustering of the estimated paths.
///
/// Seeding: the strongest unassigned path opens a cluster and absorbs every
/// unassigned path within MCD `η` of it; repeat until all paths are
/// assigned. Refinement: recompute the power-weighted centroids, move every
/// path to its nearest centroid within `η` (equidistant paths go to the
/// stronger cluster), seed new clusters from paths left without a centroid
/// in reach, and repeat until the assignment no longer changes.
pub fn cluster_with_threshold(
    estimate: &ChannelEstimate,
    eta: f64,
    cfg: &McdConfig,
) -> Result<Clustering> {
    cfg.validate()?;
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be finite and >= 0, got {eta}"
        )));
    }
    let paths = &estimate.paths;
    if paths.is_empty() {
        return Err(Error::invalid("cannot cluster an empty estimate"));
    }
    let points: Vec<McdPoint> = paths.iter().map(McdPoint::from).collect();
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| paths[b].power.total_cmp(&paths[a].power).then(a.cmp(&b)));

    let mut labels = vec![None; paths.len()];
    seed(&order, &points, eta, cfg, &mut labels, 0);
    let mut labels = canonical(&order, &labels);
    let mut history: HashSet<Vec<usize>> = HashSet::from([labels.clone()]);
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < cfg.max_sweep_iterations {
        sweeps += 1;
        let clusters = groups(estimate, &labels)?;
        let mut next: Vec<Option<usize>> = points
            .iter()
            .map(|p| {
                let mut best: Option<(usize, f64)> = None;
                for (c, cluster) in clusters.iter().enumerate() {
                    let d = mcd_points(p, &cluster.centroid(), cfg);
                    if d > eta {
                        continue;
                    }
                    best = match best {
                        None => Some((c, d)),
                        Some((bc, bd))
                            if d < bd || (d == bd && cluster.power > clusters[bc].power) =>
                        {
                            Some((c, d))
                        }
                        keep => keep,
                    };
                }
                best.map(|(c, _)| c)
            })
            .collect();
        seed(&order, &points, eta, cfg, &mut next, clusters.len());
        let next = canonical(&order, &next);
        if next == labels {
            converged = true;
            break;
        }
        if !history.insert(next.clone()) {
            log::warn!("cluster refinement revisited an earlier assignment at η = {eta}");
            labels = next;
            break;
        }
        labels = next;
    }
    if !converged {
        log::warn!(
            "cluster refinement did not reach a fixed point at η = {eta} after {sweeps} sweeps"
        );
    }
    let mut clustering = Clustering::from_labels(estimate, &labels, eta, cfg)?;
    clustering.sweeps = sweeps;
    clustering.converged = converged;
    Ok(clustering)
}

/// Opens clusters (ids from `first_label`) for the unassigned entries of
/// `labels`, strongest path first.
fn seed(
    order: &[usize],
    points: &[McdPoint],
    eta: f64,
    cfg: &McdConfig,
    labels: &mut [Option<usize>],
    first_label: usize,
) {
    let mut next_label = first_label;
    for &s in order {
        if labels[s].is_some() {
            continue;
        }
        labels[s] = Some(next_label);
        for &j in order {
            if labels[j].is_none() && mcd_points(&points[s], &points[j], cfg) <= eta {
                labels[j] = Some(next_label);
            }
        }
        next_label += 1;
    }
}

/// Relabels clusters by the order in which their strongest member appears.
fn canonical(order: &[usize], labels: &[Option<usize>]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    let mut out = vec![0; labels.len()];
    for &i in order {
        let raw = labels[i].expect("every path is assigned after seeding");
        let next = map.len();
        out[i] = *map.entry(raw).or_insert(next);
    }
    out
}

/// Clusters indexed by (dense, canonical) label.
fn groups(estimate: &ChannelEstimate, labels: &[usize]) -> Result<Vec<Cluster>> {
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); count];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    members
        .into_iter()
        .map(|m| Cluster::from_members(&estimate.paths, m))
        .collect()
}

/// Runs [`cluster_with_threshold`] for every threshold of the grid and
/// picks one partition with both validity indices:
///
/// 1. candidates are the multi-cluster partitions whose Davies–Bouldin
///    score is within `db_preselect_factor` of the lowest one (all of them
///    when the factor is `None`);
/// 2. among those, the highest Calinski–Harabasz score wins, ties going to
///    the lower Davies–Bouldin score and then the smaller threshold.
///
/// Single-cluster partitions are chosen only when every threshold yields
/// one cluster (the smallest threshold is then reported).
pub fn select_optimal_clustering(
    estimate: &ChannelEstimate,
    cfg: &McdConfig,
) -> Result<Clustering> {
    cfg.validate()?;
    let candidates = cfg
        .threshold_grid
        .iter()
        .map(|&eta| cluster_with_threshold(estimate, eta, cfg))
        .collect::<Result<Vec<_>>>()?;
    let multi: Vec<&Clustering> = candidates.iter().filter(|c| c.num_clusters() > 1).collect();
    let best_db = multi
        .iter()
        .map(|c| c.validity.db)
        .fold(f64::INFINITY, f64::min);
    let admitted = |c: &&Clustering| match cfg.db_preselect_factor {
        Some(f) if best_db.is_finite() => c.validity.db <= f * best_db,
        _ => true,
    };
    let mut best: Option<&Clustering> = None;
    for c in multi.iter().copied().filter(admitted) {
        best = match best {
            None => Some(c),
            Some(b) => {
                let better = c.validity.ch > b.validity.ch
                    || (c.validity.ch == b.validity.ch && c.validity.db < b.validity.db);
                Some(if better { c } else { b })
            }
        };
    }
    Ok(best.unwrap_or(&candidates[0]).clone())
}
