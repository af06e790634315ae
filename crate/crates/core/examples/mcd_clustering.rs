//! Groups estimated paths into clusters with the multipath component
//! distance and picks the threshold with the validity indices.

use a2glab::channel::{PathComponent, UcaGeometry};
use a2glab::clustering::{cluster_with_threshold, select_optimal_clustering, McdConfig};
use a2glab::error::Result;
use a2glab::hrpe::ChannelEstimate;
use num_complex::Complex64;

/// Returns the number of clusters chosen by the validity indices.
pub fn run_example() -> Result<usize> {
    let groups = [
        (0.2e-6, 30.0, 1.0),
        (1.6e-6, 150.0, 0.3),
        (3.5e-6, 280.0, 0.1),
    ];
    let mut paths = Vec::new();
    for (delay, azimuth, power) in groups {
        for k in 0..4 {
            let spread = k as f64;
            paths.push(PathComponent::new(
                Complex64::new((power / (1.0 + spread)).sqrt(), 0.0),
                delay + spread * 20e-9,
                (azimuth + spread * 1.5f64).to_radians(),
            ));
        }
    }
    let estimate = ChannelEstimate::from_paths(&paths, &UcaGeometry::default())?;
    let cfg = McdConfig::default();

    for eta in [0.05, 0.3, 2.0] {
        let c = cluster_with_threshold(&estimate, eta, &cfg)?;
        println!("eta {eta:4.2}: {} clusters", c.num_clusters());
    }
    let best = select_optimal_clustering(&estimate, &cfg)?;
    println!(
        "selected eta {:.3}: {} clusters, CH {:.1}, DB {:.3}",
        best.threshold_used,
        best.num_clusters(),
        best.validity.ch,
        best.validity.db
    );
    for (i, cluster) in best.clusters.iter().enumerate() {
        println!(
            "  cluster {i}: {} paths, {:.3} us, {:.1} deg, power {:.3}",
            cluster.member_indices.len(),
            cluster.centroid_delay_s * 1e6,
            cluster.centroid_azimuth_rad.to_degrees(),
            cluster.power
        );
    }
    Ok(best.num_clusters())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
