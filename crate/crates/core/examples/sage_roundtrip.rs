//! Synthesizes three plane waves and recovers their delays, azimuths and
//! powers with the SAGE estimator.

use a2glab::channel::{make_default_shape, CirTiming, PathComponent, UcaGeometry};
use a2glab::error::Result;
use a2glab::hrpe::{sage_estimate, SageConfig};
use a2glab::synth::{noise_power_for_snr, synthesize_snapshot, SynthesisConfig};
use num_complex::Complex64;

/// Returns the largest delay error (ns) and azimuth error (deg) over the
/// three paths.
pub fn run_example() -> Result<(usize, f64, f64)> {
    let timing = CirTiming {
        num_snapshots: 60,
        ..CirTiming::default()
    };
    let ts = timing.tap_spacing_s;
    let truth = [
        PathComponent::new(
            Complex64::from_polar(1.0, 0.3),
            20.3 * ts,
            40f64.to_radians(),
        ),
        PathComponent::new(
            Complex64::from_polar(0.7, -1.1),
            24.8 * ts,
            110f64.to_radians(),
        ),
        PathComponent::new(
            Complex64::from_polar(0.55, 2.0),
            31.4 * ts,
            250f64.to_radians(),
        ),
    ];
    let array = UcaGeometry::default();
    let shape = make_default_shape(timing.bandwidth_hz, timing.num_taps, ts)?;
    let config = SynthesisConfig {
        noise_power: noise_power_for_snr(1.0, 20.0),
        rng_seed: 11,
        ..SynthesisConfig::default()
    };
    let cirs = synthesize_snapshot(&truth, &[], &array, &shape, &timing, &config)?;

    let estimate = sage_estimate(&cirs, &shape, &SageConfig::default())?;
    println!(
        "model order {}, {} iterations, noise floor {:.2e}",
        estimate.model_order, estimate.convergence.iterations, estimate.noise_floor
    );
    let (mut worst_delay, mut worst_azimuth) = (0.0f64, 0.0f64);
    for path in &truth {
        let nearest = estimate
            .paths
            .iter()
            .min_by(|a, b| {
                (a.delay_s - path.delay_s)
                    .abs()
                    .total_cmp(&(b.delay_s - path.delay_s).abs())
            })
            .expect("at least one estimated path");
        let d_delay = (nearest.delay_s - path.delay_s).abs() * 1e9;
        let d_az = a2glab::channel::wrap_pi(nearest.azimuth_rad - path.azimuth_rad)
            .abs()
            .to_degrees();
        println!(
            "  true {:6.2} ns {:6.1} deg {:5.2} dB -> est {:6.2} ns {:6.1} deg {:5.2} dB",
            path.delay_s * 1e9,
            path.azimuth_rad.to_degrees(),
            10.0 * path.power().log10(),
            nearest.delay_s * 1e9,
            nearest.azimuth_rad.to_degrees(),
            10.0 * nearest.power.log10()
        );
        worst_delay = worst_delay.max(d_delay);
        worst_azimuth = worst_azimuth.max(d_az);
    }
    Ok((estimate.model_order, worst_delay, worst_azimuth))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
