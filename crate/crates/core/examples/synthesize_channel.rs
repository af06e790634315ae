//! Draws a rural ground-level channel from the built-in scenario table and
//! synthesizes its noisy array CIRs.

use a2glab::channel::{make_default_shape, CirTiming, UcaGeometry};
use a2glab::error::Result;
use a2glab::hrpe::apdp;
use a2glab::synth::{
    draw_scenario_clusters, noise_power_for_snr, synthesize_snapshot, Scenario,
    ScenarioStatsConfig, SynthesisConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the number of drawn paths and the tap index of the APDP peak.
pub fn run_example() -> Result<(usize, usize)> {
    let table = ScenarioStatsConfig::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut channel = draw_scenario_clusters(&table, Scenario::Rural, 0, &mut rng)?;

    let timing = CirTiming {
        num_snapshots: 40,
        ..CirTiming::default()
    };
    // Move the first arrival away from the window edge.
    let first_arrival = 10.0 * timing.tap_spacing_s;
    channel
        .paths
        .iter_mut()
        .for_each(|p| p.delay_s += first_arrival);
    println!(
        "{} clusters, {} paths",
        channel.num_clusters(),
        channel.paths.len()
    );
    for (p, c) in channel.paths.iter().zip(&channel.cluster_ids) {
        println!(
            "  cluster {c}: {:6.2} dB  {:8.2} ns  {:7.2} deg",
            10.0 * p.power().log10(),
            p.delay_s * 1e9,
            p.azimuth_rad.to_degrees()
        );
    }

    let array = UcaGeometry::default();
    let shape = make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s)?;
    let strongest = channel.paths.iter().map(|p| p.power()).fold(0.0, f64::max);
    let config = SynthesisConfig {
        noise_power: noise_power_for_snr(strongest, 20.0),
        rng_seed: 7,
        ..SynthesisConfig::default()
    };
    let cirs = synthesize_snapshot(&channel.paths, &[], &array, &shape, &timing, &config)?;
    let profile = apdp(&cirs, 0)?;
    let peak = (0..profile.len())
        .max_by(|&a, &b| profile[a].total_cmp(&profile[b]))
        .unwrap_or(0);
    println!("APDP of element 0 peaks at tap {peak}");
    Ok((channel.paths.len(), peak))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
