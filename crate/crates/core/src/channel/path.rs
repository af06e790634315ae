use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One propagation path: complex amplitude, delay, azimuth, elevation
/// (from zenith) and Doppler shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub amplitude: Complex64,
    pub delay_s: f64,
    pub azimuth_rad: f64,
    /// Measured from zenith; horizontal when omitted.
    #[serde(default = "horizontal")]
    pub elevation_rad: f64,
    #[serde(default)]
    pub doppler_hz: f64,
}

fn horizontal() -> f64 {
    PI / 2.0
}

impl PathComponent {
    /// Horizontal arrival with zero Doppler.
    pub fn new(amplitude: Complex64, delay_s: f64, azimuth_rad: f64) -> Self {
        Self {
            amplitude,
            delay_s,
            azimuth_rad,
            elevation_rad: PI / 2.0,
            doppler_hz: 0.0,
        }
    }

    pub fn with_elevation(mut self, elevation_rad: f64) -> Self {
        self.elevation_rad = elevation_rad;
        self
    }

    pub fn with_doppler(mut self, doppler_hz: f64) -> Self {
        self.doppler_hz = doppler_hz;
        self
    }

    pub fn power(&self) -> f64 {
        self.amplitude.norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delay_s.is_finite() && self.delay_s >= 0.0) {
            return Err(Error::validation(
                "delay_s",
                "must be finite and non-negative",
            ));
        }
        if !(self.amplitude.norm() > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::validation(
                "amplitude",
                "must be finite and non-zero",
            ));
        }
        if !(0.0..2.0 * PI).contains(&self.azimuth_rad) {
            return Err(Error::validation("azimuth_rad", "must lie in [0, 2π)"));
        }
        if !(0.0..=PI).contains(&self.elevation_rad) {
            return Err(Error::validation("elevation_rad", "must lie in [0, π]"));
        }
        if !self.doppler_hz.is_finite() {
            return Err(Error::validation("doppler_hz", "must be finite"));
        }
        Ok(())
    }
}

/// Per-antenna complex gains of one path, absorbing element pattern and
/// blockage differences across the array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerAntennaGains {
    gains: Vec<Complex64>,
}

impl PerAntennaGains {
    pub fn new(gains: Vec<Complex64>) -> Result<Self> {
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("per-antenna gains must be finite"));
        }
        if gains.iter().all(|g| g.norm_sqr() == 0.0) {
            return Err(Error::invalid("per-antenna gains are all zero"));
        }
        Ok(Self { gains })
    }

    pub fn uniform(num_elements: usize) -> Self {
        Self {
            gains: vec![Complex64::new(1.0, 0.0); num_elements],
        }
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}
