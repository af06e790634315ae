//! Synthetic array CIRs.
//!
//! [`synthesize_snapshot`] evaluates the received-signal model
//! `h(m, t, τ) = Σ_ℓ α_ℓ · a_m(φ_ℓ, θ_ℓ) · r_ℓ,m · u(τ − τ_ℓ) · e^{j2πν_ℓ t} + n(m, t, τ)`
//! on the CIR grid. [`scenario`] draws path lists from per-height channel
//! statistics and [`calibration`] simulates direct-connection recordings.

pub mod calibration;
pub mod scenario;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{
    wrap_pi, ArrayCirSet, CirTiming, PathComponent, PerAntennaGains, ShapeFunction, UcaGeometry,
};
use crate::error::{Error, Result};

pub use calibration::simulate_calibration_recording;
pub use scenario::{
    draw_scenario_channel, draw_scenario_clusters, DelayOffsetModel, DrawnChannel, MetricStat,
    Scenario, ScenarioStats, ScenarioStatsConfig, StatRecord,
};

/// How per-antenna gains `r_ℓ,m` are generated when none are supplied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainModel {
    Uniform,
    /// Amplitude ripple, `20·log10|r_m| ~ N(0, σ_dB²)`, drawn once per
    /// snapshot set and shared by all paths.
    LogNormalRipple {
        sigma_db: f64,
    },
    /// Elements whose azimuth lies within `arc_deg` of the direction
    /// opposite the arrival are attenuated by `depth_db`.
    Blockage {
        depth_db: f64,
        arc_deg: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Per-sample variance of the complex white Gaussian noise.
    pub noise_power: f64,
    pub gain_model: GainModel,
    pub rng_seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            noise_power: 0.0,
            gain_model: GainModel::Uniform,
            rng_seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::validation("noise_power", "must be finite and >= 0"));
        }
        match self.gain_model {
            GainModel::Uniform => {}
            GainModel::LogNormalRipple { sigma_db } => {
                if !(sigma_db >= 0.0 && sigma_db.is_finite()) {
                    return Err(Error::validation("gain_model.sigma_db", "must be >= 0"));
                }
            }
            GainModel::Blockage { depth_db, arc_deg } => {
                if !depth_db.is_finite() {
                    return Err(Error::validation("gain_model.depth_db", "must be finite"));
                }
                if !(0.0..=360.0).contains(&arc_deg) {
                    return Err(Error::validation(
                        "gain_model.arc_deg",
                        "must lie in [0, 360]",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Gains for each path under the configured model.
    pub fn draw_gains<R: Rng + ?Sized>(
        &self,
        paths: &[PathComponent],
        geometry: &UcaGeometry,
        rng: &mut R,
    ) -> Vec<PerAntennaGains> {
        let m = geometry.num_elements;
        match self.gain_model {
            GainModel::Uniform => vec![PerAntennaGains::uniform(m); paths.len()],
            GainModel::LogNormalRipple { sigma_db } => {
                let dist = Normal::new(0.0, sigma_db).expect("sigma validated");
                let ripple: Vec<Complex64> = (0..m)
                    .map(|_| Complex64::new(10f64.powf(dist.sample(rng) / 20.0), 0.0))
                    .collect();
                let gains = PerAntennaGains::new(ripple).expect("ripple gains are positive");
                vec![gains; paths.len()]
            }
            GainModel::Blockage { depth_db, arc_deg } => {
                let attenuation = 10f64.powf(-depth_db / 20.0);
                let half_arc = arc_deg.to_radians() / 2.0;
                paths
                    .iter()
                    .map(|p| {
                        let shadow = p.azimuth_rad + PI;
                        let g = geometry
                            .element_azimuths_rad
                            .iter()
                            .map(|psi| {
                                let blocked = wrap_pi(psi - shadow).abs() <= half_arc;
                                Complex64::new(if blocked { attenuation } else { 1.0 }, 0.0)
                            })
                            .collect();
                        PerAntennaGains::new(g).unwrap_or_else(|_| PerAntennaGains::uniform(m))
                    })
                    .collect()
            }
        }
    }
}

/// Noise power giving `snr_db` relative to a reference per-sample power.
pub fn noise_power_for_snr(reference_power: f64, snr_db: f64) -> f64 {
    if snr_db.is_infinite() && snr_db > 0.0 {
        0.0
    } else {
        reference_power / 10f64.powf(snr_db / 10.0)
    }
}

/// Adds complex white Gaussian noise of per-sample variance `noise_power`.
pub(crate) fn add_noise<R: Rng + ?Sized>(data: &mut [Complex64], noise_power: f64, rng: &mut R) {
    if noise_power <= 0.0 {
        return;
    }
    let scale = (noise_power / 2.0).sqrt();
    for z in data.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z += Complex64::new(re, im) * scale;
    }
}

/// Renders the noiseless contribution of one path into `cirs`.
pub(crate) fn add_path(
    cirs: &mut ArrayCirSet,
    path: &PathComponent,
    gains: &[Complex64],
    shape: &ShapeFunction,
) {
    let timing = *cirs.timing();
    let steering = cirs
        .geometry()
        .steering_unchecked(path.azimuth_rad, path.elevation_rad);
    let waveform = shape.sample_on_grid(-path.delay_s, timing.num_taps);
    let rotations: Vec<Complex64> = (0..timing.num_snapshots)
        .map(|n| Complex64::from_polar(1.0, 2.0 * PI * path.doppler_hz * timing.snapshot_time_s(n)))
        .collect();
    for (m, (a, g)) in steering.iter().zip(gains).enumerate() {
        let antenna = path.amplitude * a * g;
        for (n, rot) in rotations.iter().enumerate() {
            let coeff = antenna * rot;
            let start = cirs.index(m, n, 0);
            let row = &mut cirs.data_mut()[start..start + timing.num_taps];
            for (h, w) in row.iter_mut().zip(&waveform) {
                *h += coeff * w;
            }
        }
    }
}

/// Synthesizes one snapshot set. When `gains` is empty they are drawn from
/// `config.gain_model`; otherwise one entry per path is required.
pub fn synthesize_snapshot(
    paths: &[PathComponent],
    gains: &[PerAntennaGains],
    geometry: &UcaGeometry,
    shape: &ShapeFunction,
    timing: &CirTiming,
    config: &SynthesisConfig,
) -> Result<ArrayCirSet> {
    config.validate()?;
    let mut cirs = ArrayCirSet::zeros(geometry.clone(), *timing)?;
    if !gains.is_empty() && gains.len() != paths.len() {
        return Err(Error::invalid(format!(
            "{} paths but {} gain vectors",
            paths.len(),
            gains.len()
        )));
    }
    for g in gains {
        if g.len() != geometry.num_elements {
            return Err(Error::invalid(format!(
                "gain vector has {} entries for a {}-element array",
                g.len(),
                geometry.num_elements
            )));
        }
    }
    let max_delay = timing.max_delay_s();
    for (i, p) in paths.iter().enumerate() {
        p.validate()?;
        if p.delay_s > max_delay {
            return Err(Error::OutOfRange(format!(
                "path {i} delay {:.3e} s exceeds the {:.3e} s window",
                p.delay_s, max_delay
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let drawn;
    let gains = if gains.is_empty() {
        drawn = config.draw_gains(paths, geometry, &mut rng);
        &drawn[..]
    } else {
        gains
    };
    for (p, g) in paths.iter().zip(gains) {
        add_path(&mut cirs, p, g.gains(), shape);
    }
    add_noise(cirs.data_mut(), config.noise_power, &mut rng);
    Ok(cirs)
}
