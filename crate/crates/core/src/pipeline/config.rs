use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{CirTiming, PathComponent, UcaGeometry};
use crate::clustering::McdConfig;
use crate::error::{Error, Result};
use crate::hrpe::SageConfig;
use crate::synth::{DelayOffsetModel, Scenario, SynthesisConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Draw channels and write their CIR sets and ground truth.
    Synth,
    /// Estimate the paths of every CIR set of `input`.
    Estimate,
    /// Cluster every estimate of `input`.
    Cluster,
    /// Per-channel statistics and the summary of estimates and clusterings.
    Stats,
    /// Summary table of per-channel statistics in `input`, or of a freshly
    /// drawn ground-truth ensemble when no input is given.
    Table,
    /// Doppler, delay and shape estimation from a calibration recording.
    Calibrate,
    /// synth → estimate → cluster → stats → table, with a comparison of
    /// the recovered statistics against the ground truth.
    Roundtrip,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Synth => "synth",
            Mode::Estimate => "estimate",
            Mode::Cluster => "cluster",
            Mode::Stats => "stats",
            Mode::Table => "table",
            Mode::Calibrate => "calibrate",
            Mode::Roundtrip => "roundtrip",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::validation("mode", format!("unknown mode `{s}`")))
    }
}

/// Receiver array of the synthetic channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySettings {
    pub num_elements: usize,
    pub radius_m: f64,
    pub carrier_hz: f64,
}

impl Default for ArraySettings {
    fn default() -> Self {
        let g = UcaGeometry::default();
        Self {
            num_elements: g.num_elements,
            radius_m: g.radius_m,
            carrier_hz: g.carrier_hz,
        }
    }
}

impl ArraySettings {
    pub fn geometry(&self) -> Result<UcaGeometry> {
        UcaGeometry::new(self.num_elements, self.radius_m, self.carrier_hz)
    }
}

/// Simulated calibration recording, used when `calibrate` has no input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    pub doppler_hz: f64,
    pub snr_db: f64,
    pub num_cirs: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            doppler_hz: -12.0,
            snr_db: 30.0,
            num_cirs: 400,
        }
    }
}

/// Everything a pipeline run needs. Loaded from JSON; every field has a
/// default except `mode`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Option<Mode>,
    /// Input directory (estimate, cluster, stats, table) or recording
    /// header file (calibrate).
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub scenario: Scenario,
    pub height_m: u32,
    pub num_channels: usize,
    /// Channel `i` uses seed `rng_seed + i`.
    pub rng_seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    /// Scenario statistics file replacing the built-in table.
    pub scenario_stats: Option<PathBuf>,
    pub delay_offset_model: DelayOffsetModel,
    /// Explicit path list used for every channel instead of scenario draws.
    pub paths: Option<Vec<PathComponent>>,
    pub array: ArraySettings,
    pub timing: CirTiming,
    /// Shape function file; default is the Hann-windowed sinc spanning the
    /// CIR window.
    pub shape: Option<PathBuf>,
    /// Delay added to every drawn path so the first arrival is not at the
    /// window edge.
    pub first_arrival_s: f64,
    /// Noise level relative to the strongest path of each channel. When
    /// absent, `synthesis.noise_power` is used as an absolute level.
    pub snr_db: Option<f64>,
    /// Redraws allowed per channel when a drawn path falls outside the CIR
    /// window.
    pub max_redraws: usize,
    pub synthesis: SynthesisConfig,
    pub sage: SageConfig,
    pub mcd: McdConfig,
    pub calibration: CalibrationSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let timing = CirTiming::default();
        Self {
            mode: None,
            input: None,
            out_dir: PathBuf::from("a2glab-out"),
            scenario: Scenario::Rural,
            height_m: 0,
            num_channels: 1,
            rng_seed: 0,
            jobs: 1,
            scenario_stats: None,
            delay_offset_model: DelayOffsetModel::default(),
            paths: None,
            array: ArraySettings::default(),
            first_arrival_s: 10.0 * timing.tap_spacing_s,
            timing,
            shape: None,
            snr_db: None,
            max_redraws: 100,
            synthesis: SynthesisConfig::default(),
            sage: SageConfig::default(),
            mcd: McdConfig::default(),
            calibration: CalibrationSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(json_field(&e), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode
            .ok_or_else(|| Error::validation("mode", "a mode is required"))
    }

    /// Applies a `dotted.key=value` override. The value is parsed as JSON
    /// when possible and taken as a string otherwise.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| {
            Error::invalid(format!(
                "override `{assignment}` is not of the form key=value"
            ))
        })?;
        let key = key.trim();
        let value: Value =
            serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut tree = serde_json::to_value(&*self).expect("config serializes");
        let mut node = &mut tree;
        let parts: Vec<&str> = key.split('.').collect();
        let (last, parents) = parts.split_last().expect("split yields at least one part");
        for part in parents {
            let child = node
                .as_object_mut()
                .and_then(|obj| obj.get_mut(*part))
                .ok_or_else(|| Error::validation(key, "unknown configuration field"))?;
            if child.is_null() {
                *child = Value::Object(Default::default());
            }
            node = child;
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::validation(key, "does not name a configuration field"))?;
        if !obj.contains_key(*last) {
            return Err(Error::validation(key, "unknown configuration field"));
        }
        obj.insert(last.to_string(), value);
        *self = serde_json::from_value(tree).map_err(|e| Error::validation(key, e.to_string()))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let mode = self.mode()?;
        if self.num_channels == 0 {
            return Err(Error::validation("num_channels", "must be at least 1"));
        }
        if matches!(mode, Mode::Estimate | Mode::Cluster | Mode::Stats) && self.input.is_none() {
            return Err(Error::validation(
                "input",
                format!("mode `{}` needs an input directory", mode.as_str()),
            ));
        }
        self.array.geometry()?;
        self.timing.validate()?;
        self.synthesis.validate()?;
        self.sage.validate()?;
        self.mcd.validate()?;
        if !(self.first_arrival_s >= 0.0 && self.first_arrival_s < self.timing.max_delay_s()) {
            return Err(Error::validation(
                "first_arrival_s",
                "must lie inside the CIR window",
            ));
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return Err(Error::validation("snr_db", "must be a number"));
            }
        }
        if let Some(paths) = &self.paths {
            for p in paths {
                p.validate()
                    .map_err(|e| Error::validation("paths", e.to_string()))?;
            }
        }
        if self.calibration.num_cirs < 2 {
            return Err(Error::validation(
                "calibration.num_cirs",
                "must be at least 2",
            ));
        }
        Ok(())
    }

    /// The configuration as echoed in the manifest: output location left
    /// out so identical runs in different directories match byte for byte.
    pub fn echo(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("out_dir");
        }
        v
    }
}

/// Best-effort field name of a serde_json error ("unknown field `x`",
/// "missing field `x`"); falls back to `config`.
fn json_field(e: &serde_json::Error) -> String {
    let text = e.to_string();
    text.split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string())
}
