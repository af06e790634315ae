//! Composite and cluster-level statistics of one clustered channel.

use a2glab::channel::{PathComponent, UcaGeometry};
use a2glab::clustering::{select_optimal_clustering, McdConfig};
use a2glab::error::Result;
use a2glab::hrpe::ChannelEstimate;
use a2glab::stats::{cluster_level_stats, composite_spreads};
use num_complex::Complex64;

/// Returns the composite delay spread in seconds.
pub fn run_example() -> Result<f64> {
    let paths = [
        PathComponent::new(Complex64::new(1.0, 0.0), 100e-9, 10f64.to_radians()),
        PathComponent::new(Complex64::new(0.6, 0.0), 130e-9, 14f64.to_radians()),
        PathComponent::new(Complex64::new(0.4, 0.0), 2.1e-6, 200f64.to_radians()),
    ];
    let estimate = ChannelEstimate::from_paths(&paths, &UcaGeometry::default())?;
    let (delay_spread, azimuth_spread) = composite_spreads(&estimate)?;
    println!(
        "composite delay spread {:.1} ns, azimuth spread {azimuth_spread:.1} deg",
        delay_spread * 1e9
    );

    let clustering = select_optimal_clustering(&estimate, &McdConfig::default())?;
    let stats = cluster_level_stats(&clustering, &estimate)?;
    println!(
        "{} clusters, K = {:?} dB",
        stats.cluster_count, stats.cluster_k_db
    );
    for (i, c) in stats.clusters.iter().enumerate() {
        println!(
            "  cluster {i}: {} paths, delay spread {:.1} ns, azimuth spread {:.2} deg",
            c.num_paths,
            c.delay_spread_s * 1e9,
            c.azimuth_spread_deg
        );
    }
    println!("delay offsets (s): {:?}", stats.delay_offsets_s);
    println!("azimuth offsets (deg): {:?}", stats.azimuth_offsets_deg);
    println!("power offsets (dB): {:?}", stats.power_offsets_db);
    Ok(delay_spread)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
