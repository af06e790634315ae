use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::UcaGeometry;
use crate::error::{Error, Result};

/// Snapshot/tap grid of an array CIR recording.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CirTiming {
    pub num_snapshots: usize,
    pub num_taps: usize,
    pub snapshot_spacing_s: f64,
    pub tap_spacing_s: f64,
    pub bandwidth_hz: f64,
}

impl Default for CirTiming {
    fn default() -> Self {
        Self {
            num_snapshots: 180,
            num_taps: 200,
            snapshot_spacing_s: 5e-4,
            tap_spacing_s: 1.0 / 18e6,
            bandwidth_hz: 18e6,
        }
    }
}

impl CirTiming {
    pub fn validate(&self) -> Result<()> {
        if self.num_snapshots == 0 {
            return Err(Error::validation("num_snapshots", "must be at least 1"));
        }
        if self.num_taps == 0 {
            return Err(Error::validation("num_taps", "must be at least 1"));
        }
        if !(self.snapshot_spacing_s > 0.0 && self.snapshot_spacing_s.is_finite()) {
            return Err(Error::validation("snapshot_spacing_s", "must be positive"));
        }
        if !(self.tap_spacing_s > 0.0 && self.tap_spacing_s.is_finite()) {
            return Err(Error::validation("tap_spacing_s", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::validation("bandwidth_hz", "must be positive"));
        }
        Ok(())
    }

    /// Last representable delay, `(T - 1)·Δτ`.
    pub fn max_delay_s(&self) -> f64 {
        (self.num_taps - 1) as f64 * self.tap_spacing_s
    }

    pub fn snapshot_time_s(&self, n: usize) -> f64 {
        n as f64 * self.snapshot_spacing_s
    }
}

/// Complex CIR tensor `h(m, t_n, τ_k)` stored row-major in `(m, n, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayCirSet {
    geometry: UcaGeometry,
    timing: CirTiming,
    data: Vec<Complex64>,
}

impl ArrayCirSet {
    pub fn zeros(geometry: UcaGeometry, timing: CirTiming) -> Result<Self> {
        geometry.validate()?;
        timing.validate()?;
        let len = geometry.num_elements * timing.num_snapshots * timing.num_taps;
        Ok(Self {
            geometry,
            timing,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_data(
        geometry: UcaGeometry,
        timing: CirTiming,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        geometry.validate()?;
        timing.validate()?;
        let expected = geometry.num_elements * timing.num_snapshots * timing.num_taps;
        if data.len() != expected {
            return Err(Error::invalid(format!(
                "CIR tensor has {} samples, metadata implies {expected}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::invalid("CIR tensor contains non-finite samples"));
        }
        Ok(Self {
            geometry,
            timing,
            data,
        })
    }

    pub fn geometry(&self) -> &UcaGeometry {
        &self.geometry
    }

    pub fn timing(&self) -> &CirTiming {
        &self.timing
    }

    pub fn num_antennas(&self) -> usize {
        self.geometry.num_elements
    }

    pub fn num_snapshots(&self) -> usize {
        self.timing.num_snapshots
    }

    pub fn num_taps(&self) -> usize {
        self.timing.num_taps
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize, k: usize) -> usize {
        (m * self.timing.num_snapshots + n) * self.timing.num_taps + k
    }

    pub fn get(&self, m: usize, n: usize, k: usize) -> Complex64 {
        self.data[self.index(m, n, k)]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Taps of antenna `m` at snapshot `n`.
    pub fn snapshot(&self, m: usize, n: usize) -> &[Complex64] {
        let start = self.index(m, n, 0);
        &self.data[start..start + self.timing.num_taps]
    }

    pub fn total_power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Multiplies every sample by `factor`.
    pub fn scale(&mut self, factor: Complex64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }
}
