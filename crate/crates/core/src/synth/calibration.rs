use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::add_noise;
use crate::channel::{ArrayCirSet, CirTiming, ShapeFunction, UcaGeometry};
use crate::error::{Error, Result};

/// Snapshot spacing of the calibration recordings.
pub const CALIBRATION_SNAPSHOT_SPACING_S: f64 = 5e-4;

/// Single-antenna direct-connection recording,
/// `h_d(t_n, τ_k) = u(τ_k − delay) · e^{j2πν t_n} + noise`, with the noise
/// level set relative to the unit peak power of `u`. The tap grid follows
/// the shape (same spacing and length).
pub fn simulate_calibration_recording<R: Rng + ?Sized>(
    doppler_hz: f64,
    snr_db: f64,
    shape: &ShapeFunction,
    delay_s: f64,
    num_cirs: usize,
    rng: &mut R,
) -> Result<ArrayCirSet> {
    if num_cirs < 2 {
        return Err(Error::invalid(
            "a calibration recording needs at least two CIRs",
        ));
    }
    if !doppler_hz.is_finite() || !delay_s.is_finite() || snr_db.is_nan() {
        return Err(Error::invalid("calibration parameters must be finite"));
    }
    let timing = CirTiming {
        num_snapshots: num_cirs,
        num_taps: shape.len(),
        snapshot_spacing_s: CALIBRATION_SNAPSHOT_SPACING_S,
        tap_spacing_s: shape.tap_spacing_s(),
        bandwidth_hz: 1.0 / shape.tap_spacing_s(),
    };
    let geometry = UcaGeometry::single_antenna(1.8e9)?;
    let mut cirs = ArrayCirSet::zeros(geometry, timing)?;
    let waveform = shape.sample_on_grid(-delay_s, timing.num_taps);
    for n in 0..num_cirs {
        let rot = Complex64::from_polar(1.0, 2.0 * PI * doppler_hz * timing.snapshot_time_s(n));
        let start = cirs.index(0, n, 0);
        let row = &mut cirs.data_mut()[start..start + timing.num_taps];
        for (h, w) in row.iter_mut().zip(&waveform) {
            *h = w * rot;
        }
    }
    add_noise(
        cirs.data_mut(),
        super::noise_power_for_snr(1.0, snr_db),
        rng,
    );
    Ok(cirs)
}
