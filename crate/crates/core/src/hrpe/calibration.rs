use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::refine_max;
use crate::channel::{ArrayCirSet, ShapeFunction};
use crate::error::{Error, Result};

/// Zero-padding factor of the calibration Doppler search.
const DOPPLER_ZERO_PADDING: usize = 4;
const DOPPLER_REFINEMENT_ROUNDS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEstimate {
    /// Residual Doppler of the recording (oscillator offset).
    pub doppler_hz: f64,
    /// Delay of the strongest tap.
    pub delay_s: f64,
    /// Coherently combined shape, unit peak with zero phase, peak at the
    /// center tap.
    pub shape: ShapeFunction,
}

/// Estimates the residual Doppler, the delay and the system shape function
/// from a single-antenna direct-connection recording.
///
/// The delay is the tap with the largest time-summed power. The Doppler
/// maximizes the coherent-combining magnitude `|Σ_n h(t_n, τ̂) e^{−j2πν t_n}|`
/// (zero-padded FFT, then quadratic refinement on the exact sum). The shape
/// is `Σ_n h(t_n, τ) e^{−j2πν̂ t_n}` divided by its complex peak value and
/// shifted so that the peak lands on tap `T/2`.
pub fn estimate_calibration(recording: &ArrayCirSet) -> Result<CalibrationEstimate> {
    if recording.num_antennas() != 1 {
        return Err(Error::invalid(format!(
            "calibration expects a single-antenna recording, got {} antennas",
            recording.num_antennas()
        )));
    }
    let (n_count, t_count) = (recording.num_snapshots(), recording.num_taps());
    if n_count < 2 {
        return Err(Error::invalid("calibration needs at least two CIRs"));
    }
    let timing = recording.timing();
    let data = recording.data();

    let mut tap_power = vec![0.0; t_count];
    for row in data.chunks_exact(t_count) {
        for (p, h) in tap_power.iter_mut().zip(row) {
            *p += h.norm_sqr();
        }
    }
    let (peak_tap, peak_power) =
        tap_power
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
    if !(peak_power > 0.0) {
        return Err(Error::DegenerateInput(
            "calibration recording is all zero".into(),
        ));
    }

    let series: Vec<Complex64> = (0..n_count).map(|n| data[n * t_count + peak_tap]).collect();
    let dt = timing.snapshot_spacing_s;
    let q = n_count * DOPPLER_ZERO_PADDING;
    let mut buf = vec![Complex64::new(0.0, 0.0); q];
    buf[..n_count].copy_from_slice(&series);
    FftPlanner::new().plan_fft_forward(q).process(&mut buf);
    let (bin, bin_value) =
        buf.iter()
            .map(|v| v.norm())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    let bin_hz = 1.0 / (q as f64 * dt);
    let signed_bin = if bin < q.div_ceil(2) {
        bin as f64
    } else {
        bin as f64 - q as f64
    };
    let mut coherent = |nu: f64| combine(&series, nu, dt).norm();
    let nyquist = 0.5 / dt;
    let (doppler_hz, _) = refine_max(
        &mut coherent,
        signed_bin * bin_hz,
        bin_value,
        bin_hz,
        DOPPLER_REFINEMENT_ROUNDS,
        -nyquist,
        nyquist,
    );

    let mut combined = vec![Complex64::new(0.0, 0.0); t_count];
    for (n, row) in data.chunks_exact(t_count).enumerate() {
        let derotate = Complex64::from_polar(1.0, -2.0 * PI * doppler_hz * dt * n as f64);
        for (c, h) in combined.iter_mut().zip(row) {
            *c += derotate * h;
        }
    }
    let (shape_peak, _) = combined.iter().map(|v| v.norm_sqr()).enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, cur| if cur.1 > best.1 { cur } else { best },
    );
    let reference = combined[shape_peak];
    let center = t_count / 2;
    let taps = (0..t_count)
        .map(|i| {
            let src = i as i64 - center as i64 + shape_peak as i64;
            if (0..t_count as i64).contains(&src) {
                combined[src as usize] / reference
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(CalibrationEstimate {
        doppler_hz,
        delay_s: peak_tap as f64 * timing.tap_spacing_s,
        shape: ShapeFunction::new(taps, timing.tap_spacing_s)?,
    })
}

fn combine(series: &[Complex64], doppler_hz: f64, dt: f64) -> Complex64 {
    series
        .iter()
        .enumerate()
        .map(|(n, h)| h * Complex64::from_polar(1.0, -2.0 * PI * doppler_hz * dt * n as f64))
        .sum()
}
