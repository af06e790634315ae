use a2glab::channel::{make_default_shape, CirTiming};
use a2glab::hrpe::estimate_calibration;
use a2glab::synth::simulate_calibration_recording;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::support::Verdict;

const TRIALS: usize = 50;
const DOPPLER_HZ: f64 = -12.0;
const NUM_CIRS: usize = 400;
const SNR_DB: f64 = 30.0;
const DOPPLER_TOL_HZ: f64 = 1.0;
const NMSE_LIMIT_DB: f64 = -30.0;

pub fn calibration() -> Verdict {
    let timing = CirTiming::default();
    let shape =
        make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s).unwrap();
    let reference: f64 = shape.taps().iter().map(|z| z.norm_sqr()).sum();
    // Centre the recorded pulse so the whole shape lies inside the window.
    let delay = shape.peak_index() as f64 * shape.tap_spacing_s();
    let mut doppler_ok = 0;
    let mut shape_ok = 0;
    let (mut worst_doppler, mut worst_nmse) = (0.0f64, f64::NEG_INFINITY);
    for trial in 0..TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + trial as u64);
        let recording =
            simulate_calibration_recording(DOPPLER_HZ, SNR_DB, &shape, delay, NUM_CIRS, &mut rng)
                .unwrap();
        let est = estimate_calibration(&recording).unwrap();
        let doppler_error = (est.doppler_hz - DOPPLER_HZ).abs();
        let error: f64 = est
            .shape
            .taps()
            .iter()
            .zip(shape.taps())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let nmse_db = 10.0 * (error / reference).log10();
        doppler_ok += usize::from(doppler_error <= DOPPLER_TOL_HZ);
        shape_ok += usize::from(nmse_db <= NMSE_LIMIT_DB);
        worst_doppler = worst_doppler.max(doppler_error);
        worst_nmse = worst_nmse.max(nmse_db);
    }
    Verdict::new(
        doppler_ok == TRIALS && shape_ok == TRIALS,
        format!(
            "Doppler within {DOPPLER_TOL_HZ} Hz in {doppler_ok}/{TRIALS} (worst {worst_doppler:.3} Hz); \
             shape NMSE <= {NMSE_LIMIT_DB} dB in {shape_ok}/{TRIALS} (worst {worst_nmse:.1} dB)"
        ),
    )
}
