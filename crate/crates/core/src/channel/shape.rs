use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional tap positions closer than this to an integer are grid hits.
const GRID_HIT_TOL: f64 = 1e-9;

/// Sampled system response `u(τ)`. Offsets are measured from the peak tap,
/// so `evaluate(0.0)` is the peak value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRecord", into = "ShapeRecord")]
pub struct ShapeFunction {
    taps: Vec<Complex64>,
    tap_spacing_s: f64,
    peak_index: usize,
    energy: f64,
}

#[derive(Serialize, Deserialize)]
struct ShapeRecord {
    taps: Vec<Complex64>,
    tap_spacing_s: f64,
    peak_index: usize,
}

impl TryFrom<ShapeRecord> for ShapeFunction {
    type Error = Error;

    fn try_from(rec: ShapeRecord) -> Result<Self> {
        let shape = ShapeFunction::new(rec.taps, rec.tap_spacing_s)?;
        if shape.peak_index != rec.peak_index {
            return Err(Error::validation(
                "peak_index",
                format!(
                    "stored {} but peak tap is {}",
                    rec.peak_index, shape.peak_index
                ),
            ));
        }
        Ok(shape)
    }
}

impl From<ShapeFunction> for ShapeRecord {
    fn from(s: ShapeFunction) -> Self {
        ShapeRecord {
            taps: s.taps,
            tap_spacing_s: s.tap_spacing_s,
            peak_index: s.peak_index,
        }
    }
}

impl ShapeFunction {
    /// Builds a shape from raw taps, scaling so the strongest tap has unit
    /// magnitude. The phase is left untouched.
    pub fn new(taps: Vec<Complex64>, tap_spacing_s: f64) -> Result<Self> {
        if !(tap_spacing_s > 0.0 && tap_spacing_s.is_finite()) {
            return Err(Error::invalid("tap spacing must be positive"));
        }
        if taps.is_empty() || taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("shape taps must be non-empty and finite"));
        }
        let (peak_index, peak) = taps.iter().enumerate().fold((0, 0.0), |(bi, bv), (i, t)| {
            let v = t.norm();
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
        if peak == 0.0 {
            return Err(Error::DegenerateInput("shape taps are all zero".into()));
        }
        let taps: Vec<Complex64> = taps.into_iter().map(|t| t / peak).collect();
        let energy = taps.iter().map(|t| t.norm_sqr()).sum::<f64>() * tap_spacing_s;
        Ok(Self {
            taps,
            tap_spacing_s,
            peak_index,
            energy,
        })
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn tap_spacing_s(&self) -> f64 {
        self.tap_spacing_s
    }

    pub fn peak_index(&self) -> usize {
        self.peak_index
    }

    /// `Σ|u_k|²·Δτ`, the discrete stand-in for `∫|u(τ)|² dτ`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn evaluate(&self, delay_offset_s: f64) -> Complex64 {
        let position = self.peak_index as f64 + delay_offset_s / self.tap_spacing_s;
        band_limited_interpolate(&self.taps, position)
    }

    /// Samples `u(first_offset_s + i·Δτ)` for `i in 0..count`.
    ///
    /// All requested points share one fractional tap position, so the
    /// interpolation kernel is tabulated once and reused.
    pub fn sample_on_grid(&self, first_offset_s: f64, count: usize) -> Vec<Complex64> {
        let len = self.taps.len();
        let x0 = self.peak_index as f64 + first_offset_s / self.tap_spacing_s;
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        if !x0.is_finite() {
            return out;
        }
        let base = x0.floor();
        let frac = x0 - base;
        let last = (len - 1) as f64;

        if frac < GRID_HIT_TOL || 1.0 - frac < GRID_HIT_TOL {
            let start = x0.round();
            for (i, o) in out.iter_mut().enumerate() {
                let pos = start + i as f64;
                if (0.0..=last).contains(&pos) {
                    *o = self.taps[pos as usize];
                }
            }
            return out;
        }

        // in-support output range: 0 <= x0 + i <= len - 1
        let i_lo = (-x0).ceil().max(0.0) as usize;
        let i_hi_f = (last - x0).floor();
        if i_hi_f < 0.0 || i_lo >= count {
            return out;
        }
        let i_hi = (i_hi_f as usize).min(count - 1);
        if i_lo > i_hi {
            return out;
        }

        // y = x0 + i - j = (base + i - j) + frac, d = base + i - j
        let base_i = base as i64;
        let d_min = base_i + i_lo as i64 - (len as i64 - 1);
        let d_max = base_i + i_hi as i64;
        let sin_frac = (PI * frac).sin();
        let kernel: Vec<f64> = (d_min..=d_max)
            .map(|d| {
                let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                dirichlet_with_sin(d as f64 + frac, sign * sin_frac, len)
            })
            .collect();

        for (i, o) in out.iter_mut().enumerate().take(i_hi + 1).skip(i_lo) {
            let mut acc = Complex64::new(0.0, 0.0);
            let offset = base_i + i as i64 - d_min;
            for (j, tap) in self.taps.iter().enumerate() {
                acc += tap * kernel[(offset - j as i64) as usize];
            }
            *o = acc;
        }
        out
    }
}

/// Periodic band-limited kernel of a length-`len` sequence, with the
/// Nyquist bin split evenly for even lengths. `sin_pi_y` is `sin(πy)`.
fn dirichlet_with_sin(y: f64, sin_pi_y: f64, len: usize) -> f64 {
    let n = len as f64;
    if len.is_multiple_of(2) {
        sin_pi_y / (n * (PI * y / n).tan())
    } else {
        sin_pi_y / (n * (PI * y / n).sin())
    }
}

/// Trigonometric interpolation of `taps` at fractional tap index
/// `position`. Returns the stored tap on grid hits and zero outside
/// `[0, len - 1]`. Linear in `taps`.
pub fn band_limited_interpolate(taps: &[Complex64], position: f64) -> Complex64 {
    let len = taps.len();
    let zero = Complex64::new(0.0, 0.0);
    if len == 0 || !position.is_finite() {
        return zero;
    }
    let last = (len - 1) as f64;
    if position < -GRID_HIT_TOL || position > last + GRID_HIT_TOL {
        return zero;
    }
    let nearest = position.round();
    if (position - nearest).abs() < GRID_HIT_TOL {
        return taps[nearest.clamp(0.0, last) as usize];
    }
    taps.iter()
        .enumerate()
        .map(|(j, tap)| {
            let y = position - j as f64;
            tap * dirichlet_with_sin(y, (PI * y).sin(), len)
        })
        .sum()
}

pub fn evaluate_shape(shape: &ShapeFunction, delay_offset_s: f64) -> Complex64 {
    shape.evaluate(delay_offset_s)
}

/// Hann-windowed sinc of the given bandwidth on the tap grid, peak at the
/// center tap `num_taps / 2`.
pub fn make_default_shape(
    bandwidth_hz: f64,
    num_taps: usize,
    tap_spacing_s: f64,
) -> Result<ShapeFunction> {
    if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
        return Err(Error::invalid("bandwidth must be positive"));
    }
    if num_taps < 8 {
        return Err(Error::invalid("default shape needs at least 8 taps"));
    }
    if !(tap_spacing_s > 0.0 && tap_spacing_s.is_finite()) {
        return Err(Error::invalid("tap spacing must be positive"));
    }
    let peak = num_taps / 2;
    let window = num_taps as f64 * tap_spacing_s;
    let taps = (0..num_taps)
        .map(|k| {
            let t = (k as f64 - peak as f64) * tap_spacing_s;
            let x = bandwidth_hz * t;
            let sinc = if x == 0.0 {
                1.0
            } else {
                (PI * x).sin() / (PI * x)
            };
            let hann = 0.5 * (1.0 + (2.0 * PI * t / window).cos());
            Complex64::new(sinc * hann, 0.0)
        })
        .collect();
    ShapeFunction::new(taps, tap_spacing_s)
}
