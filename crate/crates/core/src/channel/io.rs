//! On-disk container for [`ArrayCirSet`]: a JSON header plus a raw binary
//! of little-endian `f64` pairs `(re, im)` in `(m, n, k)` row-major order.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ArrayCirSet, CirTiming, ShapeFunction, UcaGeometry};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirSetHeader {
    pub geometry: UcaGeometry,
    pub num_snapshots: usize,
    pub num_taps: usize,
    pub bandwidth_hz: f64,
    pub tap_spacing_s: f64,
    pub snapshot_spacing_s: f64,
    /// Shape the data was produced with: `"default"` or a shape file path.
    pub shape: String,
    /// Binary payload, relative to the header's directory.
    pub data_file: String,
}

impl CirSetHeader {
    pub fn timing(&self) -> CirTiming {
        CirTiming {
            num_snapshots: self.num_snapshots,
            num_taps: self.num_taps,
            snapshot_spacing_s: self.snapshot_spacing_s,
            tap_spacing_s: self.tap_spacing_s,
            bandwidth_hz: self.bandwidth_hz,
        }
    }
}

/// Writes `<stem>.json` and `<stem>.bin` next to each other. Returns the
/// header path.
pub fn write_cir_set(json_path: &Path, cirs: &ArrayCirSet, shape_label: &str) -> Result<PathBuf> {
    let bin_path = json_path.with_extension("bin");
    let data_file = bin_path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::invalid(format!("bad output path {}", json_path.display())))?
        .to_string();
    let t = cirs.timing();
    let header = CirSetHeader {
        geometry: cirs.geometry().clone(),
        num_snapshots: t.num_snapshots,
        num_taps: t.num_taps,
        bandwidth_hz: t.bandwidth_hz,
        tap_spacing_s: t.tap_spacing_s,
        snapshot_spacing_s: t.snapshot_spacing_s,
        shape: shape_label.to_string(),
        data_file,
    };
    let mut bytes = Vec::with_capacity(cirs.data().len() * 16);
    for z in cirs.data() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(&bin_path, bytes).map_err(|e| Error::io(&bin_path, e))?;
    write_json(json_path, &header)?;
    Ok(json_path.to_path_buf())
}

pub fn read_cir_set(json_path: &Path) -> Result<(ArrayCirSet, CirSetHeader)> {
    let header: CirSetHeader = read_json(json_path)?;
    header.geometry.validate()?;
    let bin_path = json_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.data_file);
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    if bytes.len() % 16 != 0 {
        return Err(Error::validation(
            "data_file",
            format!(
                "{} bytes is not a whole number of complex samples",
                bytes.len()
            ),
        ));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let cirs = ArrayCirSet::from_data(header.geometry.clone(), header.timing(), data)?;
    Ok((cirs, header))
}

pub fn write_shape(path: &Path, shape: &ShapeFunction) -> Result<()> {
    write_json(path, shape)
}

pub fn read_shape(path: &Path) -> Result<ShapeFunction> {
    read_json(path)
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}
