//! High-resolution parameter estimation.
//!
//! [`sage_estimate`] is a SAGE variant that never assumes identical element
//! responses: each path is first estimated as one delay, one Doppler and
//! `M` free complex amplitudes (one per antenna). Angles and the path
//! amplitude are then fitted to the amplitude vector against the UCA
//! steering vectors. The model order comes from trimming an over-complete
//! fit to the paths standing out of the noise floor.

mod calibration;
pub mod io;
mod sage;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ArrayCirSet, PathComponent, UcaGeometry};
use crate::error::{Error, Result};

pub use calibration::{estimate_calibration, CalibrationEstimate};
pub use sage::{reconstruct, sage_estimate, sage_estimate_detailed, SageOutput};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEstimate {
    pub amplitude: Complex64,
    pub per_antenna_amplitudes: Vec<Complex64>,
    pub delay_s: f64,
    pub doppler_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    pub power: f64,
}

impl PathEstimate {
    /// Mean per-antenna power, independent of the angle fit.
    pub fn antenna_power(&self) -> f64 {
        if self.per_antenna_amplitudes.is_empty() {
            return self.power;
        }
        self.per_antenna_amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            / self.per_antenna_amplitudes.len() as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    pub iterations: usize,
    /// Residual power after the last sweep.
    pub residual_power: f64,
}

/// Estimated paths of one snapshot set, strongest first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub paths: Vec<PathEstimate>,
    pub noise_floor: f64,
    pub model_order: usize,
    pub convergence: ConvergenceInfo,
}

impl ChannelEstimate {
    /// Wraps `paths` as an estimate, sorting by power.
    pub fn new(
        mut paths: Vec<PathEstimate>,
        noise_floor: f64,
        convergence: ConvergenceInfo,
    ) -> Self {
        paths.sort_by(|a, b| b.power.total_cmp(&a.power));
        Self {
            model_order: paths.len(),
            paths,
            noise_floor,
            convergence,
        }
    }

    /// Ground-truth paths presented as a noiseless estimate. Per-antenna
    /// amplitudes are the ideal `α·a_m(φ, θ)`.
    pub fn from_paths(paths: &[PathComponent], geometry: &UcaGeometry) -> Result<Self> {
        let estimates = paths
            .iter()
            .map(|p| {
                let steering = geometry.steering_vector(p.azimuth_rad, p.elevation_rad)?;
                Ok(PathEstimate {
                    amplitude: p.amplitude,
                    per_antenna_amplitudes: steering.iter().map(|a| p.amplitude * a).collect(),
                    delay_s: p.delay_s,
                    doppler_hz: p.doppler_hz,
                    azimuth_rad: p.azimuth_rad,
                    elevation_rad: p.elevation_rad,
                    power: p.power(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(estimates, 0.0, ConvergenceInfo::default()))
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.power).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_order != self.paths.len() {
            return Err(Error::validation(
                "model_order",
                "does not match the number of paths",
            ));
        }
        if self.paths.windows(2).any(|w| w[0].power < w[1].power) {
            return Err(Error::validation(
                "paths",
                "must be sorted by power, descending",
            ));
        }
        for p in &self.paths {
            if !(p.power >= 0.0) || !p.delay_s.is_finite() || !p.azimuth_rad.is_finite() {
                return Err(Error::validation(
                    "paths",
                    "non-finite or negative path parameters",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SageConfig {
    /// Initial over-estimate of the number of paths.
    pub max_paths: usize,
    /// Paths are kept when their power exceeds the noise floor by this.
    pub snr_keep_threshold_db: f64,
    /// Paths weaker than the strongest one by more than this are dropped,
    /// which bounds the model order on (near) noiseless input.
    pub dynamic_range_db: f64,
    pub max_iterations: usize,
    /// Relative change of the total reconstructed power that ends the
    /// iterations.
    pub convergence_tol: f64,
    pub delay_grid_oversampling: usize,
    /// Zero-padding factor of the Doppler FFT over snapshots.
    pub doppler_zero_padding: usize,
    pub azimuth_grid_deg: f64,
    pub elevation_grid_deg: f64,
    pub elevation_max_deg: f64,
    /// Successive 3-point quadratic refinements per dimension.
    pub refinement_rounds: usize,
}

impl Default for SageConfig {
    fn default() -> Self {
        Self {
            max_paths: 30,
            snr_keep_threshold_db: 6.0,
            dynamic_range_db: 30.0,
            max_iterations: 20,
            convergence_tol: 1e-4,
            delay_grid_oversampling: 4,
            doppler_zero_padding: 4,
            azimuth_grid_deg: 1.0,
            elevation_grid_deg: 5.0,
            elevation_max_deg: 100.0,
            refinement_rounds: 3,
        }
    }
}

impl SageConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("max_paths", self.max_paths),
            ("max_iterations", self.max_iterations),
            ("delay_grid_oversampling", self.delay_grid_oversampling),
            ("doppler_zero_padding", self.doppler_zero_padding),
        ];
        for (field, v) in positive_counts {
            if v == 0 {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        let positive_reals = [
            ("convergence_tol", self.convergence_tol),
            ("azimuth_grid_deg", self.azimuth_grid_deg),
            ("elevation_grid_deg", self.elevation_grid_deg),
            ("dynamic_range_db", self.dynamic_range_db),
        ];
        for (field, v) in positive_reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        if !(self.snr_keep_threshold_db >= 0.0) {
            return Err(Error::validation("snr_keep_threshold_db", "must be >= 0"));
        }
        if !(0.0..=180.0).contains(&self.elevation_max_deg) {
            return Err(Error::validation(
                "elevation_max_deg",
                "must lie in [0, 180]",
            ));
        }
        Ok(())
    }
}

/// Averaged power delay profile of one antenna,
/// `s(m, τ_k) = (1/N)·Σ_n |h(m, t_n, τ_k)|²`.
pub fn apdp(cirs: &ArrayCirSet, antenna_index: usize) -> Result<Vec<f64>> {
    if antenna_index >= cirs.num_antennas() {
        return Err(Error::OutOfRange(format!(
            "antenna {antenna_index} of a {}-element array",
            cirs.num_antennas()
        )));
    }
    let n = cirs.num_snapshots();
    let mut profile = vec![0.0; cirs.num_taps()];
    for s in 0..n {
        for (p, h) in profile.iter_mut().zip(cirs.snapshot(antenna_index, s)) {
            *p += h.norm_sqr();
        }
    }
    profile.iter_mut().for_each(|p| *p /= n as f64);
    Ok(profile)
}

/// Maximizes `f` around `x0` (where `f(x0) = f0`) by successive 3-point
/// quadratic interpolation with the step halved every round. The returned
/// value is never below `f0`; points outside `[lo, hi]` are not visited.
pub(crate) fn refine_max(
    f: &mut dyn FnMut(f64) -> f64,
    x0: f64,
    f0: f64,
    step: f64,
    rounds: usize,
    lo: f64,
    hi: f64,
) -> (f64, f64) {
    let (mut x, mut fx) = (x0, f0);
    let mut s = step;
    for _ in 0..rounds {
        let left = (x - s >= lo).then(|| (x - s, f(x - s)));
        let right = (x + s <= hi).then(|| (x + s, f(x + s)));
        let mut vertex = None;
        if let (Some((_, a)), Some((_, c))) = (left, right) {
            let curvature = a - 2.0 * fx + c;
            if curvature < 0.0 {
                let d = (0.5 * s * (a - c) / curvature).clamp(-s, s);
                if d != 0.0 && (lo..=hi).contains(&(x + d)) {
                    vertex = Some((x + d, f(x + d)));
                }
            }
        }
        for (xc, fc) in [vertex, left, right].into_iter().flatten() {
            if fc > fx {
                x = xc;
                fx = fc;
            }
        }
        s *= 0.5;
    }
    (x, fx)
}

/// Converts an angle in radians to degrees in `[0, 360)`.
pub(crate) fn azimuth_deg(rad: f64) -> f64 {
    crate::channel::wrap_two_pi(rad) * 180.0 / PI
}
