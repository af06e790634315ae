use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform circular array. Element `m` sits at azimuth `2π·m/M` on a circle
/// of `radius_m`; the phase reference is the array center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcaGeometry {
    pub num_elements: usize,
    pub radius_m: f64,
    pub carrier_hz: f64,
    pub element_azimuths_rad: Vec<f64>,
}

impl Default for UcaGeometry {
    fn default() -> Self {
        Self::new(16, 0.20, 1.8e9).expect("default geometry is valid")
    }
}

impl UcaGeometry {
    pub fn new(num_elements: usize, radius_m: f64, carrier_hz: f64) -> Result<Self> {
        if num_elements < 2 {
            return Err(Error::invalid("a UCA needs at least two elements"));
        }
        Self::build(num_elements, radius_m, carrier_hz)
    }

    /// One-element receiver, used for direct-connection calibration
    /// recordings. Steering is identically 1 for this geometry.
    pub fn single_antenna(carrier_hz: f64) -> Result<Self> {
        Self::build(1, 0.20, carrier_hz)
    }

    fn build(num_elements: usize, radius_m: f64, carrier_hz: f64) -> Result<Self> {
        let element_azimuths_rad = (0..num_elements)
            .map(|m| 2.0 * PI * m as f64 / num_elements as f64)
            .collect();
        let geometry = Self {
            num_elements,
            radius_m,
            carrier_hz,
            element_azimuths_rad,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return Err(Error::validation("num_elements", "must be at least 1"));
        }
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(Error::validation("radius_m", "must be positive and finite"));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::validation(
                "carrier_hz",
                "must be positive and finite",
            ));
        }
        if self.element_azimuths_rad.len() != self.num_elements {
            return Err(Error::validation(
                "element_azimuths_rad",
                format!("expected {} entries", self.num_elements),
            ));
        }
        let in_range = self
            .element_azimuths_rad
            .iter()
            .all(|a| (0.0..2.0 * PI).contains(a));
        let increasing = self.element_azimuths_rad.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(Error::validation(
                "element_azimuths_rad",
                "must be strictly increasing in [0, 2π)",
            ));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn steering_vector(&self, azimuth_rad: f64, elevation_rad: f64) -> Result<Vec<Complex64>> {
        if !azimuth_rad.is_finite() || !elevation_rad.is_finite() {
            return Err(Error::invalid("steering angles must be finite"));
        }
        Ok(self.steering_unchecked(azimuth_rad, elevation_rad))
    }

    /// Steering vector without the finiteness check, for inner loops that
    /// scan a known-good angle grid.
    pub(crate) fn steering_unchecked(
        &self,
        azimuth_rad: f64,
        elevation_rad: f64,
    ) -> Vec<Complex64> {
        if self.num_elements == 1 {
            return vec![Complex64::new(1.0, 0.0)];
        }
        let k = 2.0 * PI * self.radius_m / self.wavelength_m() * elevation_rad.sin();
        self.element_azimuths_rad
            .iter()
            .map(|psi| Complex64::from_polar(1.0, k * (azimuth_rad - psi).cos()))
            .collect()
    }
}

/// `a_m(φ, θ) = exp(j·2π·(r/λ)·sin θ·cos(φ − ψ_m))`.
pub fn steering_vector(
    geometry: &UcaGeometry,
    azimuth_rad: f64,
    elevation_rad: f64,
) -> Result<Vec<Complex64>> {
    geometry.steering_vector(azimuth_rad, elevation_rad)
}
