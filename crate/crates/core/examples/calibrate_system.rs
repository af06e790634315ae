//! Recovers the frequency offset, delay and shape function from a
//! simulated back-to-back calibration recording.

use a2glab::channel::{make_default_shape, CirTiming};
use a2glab::error::Result;
use a2glab::hrpe::estimate_calibration;
use a2glab::synth::simulate_calibration_recording;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the estimated Doppler offset in Hz and the shape error in dB.
pub fn run_example() -> Result<(f64, f64)> {
    let timing = CirTiming::default();
    let shape = make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s)?;
    let delay = shape.peak_index() as f64 * shape.tap_spacing_s();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let recording = simulate_calibration_recording(-12.0, 30.0, &shape, delay, 400, &mut rng)?;

    let estimate = estimate_calibration(&recording)?;
    let error: f64 = estimate
        .shape
        .taps()
        .iter()
        .zip(shape.taps())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let reference: f64 = shape.taps().iter().map(|z| z.norm_sqr()).sum();
    let nmse_db = 10.0 * (error / reference).log10();
    println!(
        "Doppler offset {:.3} Hz (injected -12 Hz)",
        estimate.doppler_hz
    );
    println!(
        "delay {:.2} ns (injected {:.2} ns)",
        estimate.delay_s * 1e9,
        delay * 1e9
    );
    println!("shape NMSE {nmse_db:.1} dB");
    Ok((estimate.doppler_hz, nmse_db))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
