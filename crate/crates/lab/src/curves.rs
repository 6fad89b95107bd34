//! Curve tables and their on-disk form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

/// One receiver's per-point medians.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub label: String,
    pub unit: String,
}

impl Axis {
    pub fn new(label: &str, unit: &str) -> Self {
        Axis {
            label: label.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveData {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub x: Vec<f64>,
    pub series: Vec<Series>,
    pub trials: usize,
    pub config: ExperimentConfig,
    pub snr_convention: String,
    /// Extra run facts, written to the sidecar in key order.
    pub notes: BTreeMap<String, String>,
}

impl CurveData {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.series.is_empty() {
            return Err(LabError::config("series", "a curve needs at least one series"));
        }
        for s in &self.series {
            if s.values.len() != self.x.len() {
                return Err(LabError::config(
                    "series",
                    format!("`{}` has {} points, the grid has {}", s.name, s.values.len(), self.x.len()),
                ));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(LabError::config("series", format!("`{}` has non-finite values", s.name)));
            }
        }
        Ok(())
    }

    /// Header row plus one row per x value.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write!(out, "{} [{}]", self.x_axis.label, self.x_axis.unit).unwrap();
        for s in &self.series {
            write!(out, ",{} [{}]", s.name, self.y_axis.unit).unwrap();
        }
        out.push('\n');
        for (i, x) in self.x.iter().enumerate() {
            write!(out, "{x}").unwrap();
            for s in &self.series {
                write!(out, ",{:e}", s.values[i]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn metadata_toml(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            tool: &'static str,
            version: &'static str,
            x: String,
            y: String,
            trials: usize,
            master_seed: u64,
            config_digest: String,
            snr_convention: &'a str,
            aggregation: &'static str,
            notes: &'a BTreeMap<String, String>,
            config: &'a ExperimentConfig,
        }
        let sidecar = Sidecar {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            x: format!("{} [{}]", self.x_axis.label, self.x_axis.unit),
            y: format!("{} [{}]", self.y_axis.label, self.y_axis.unit),
            trials: self.trials,
            master_seed: self.config.master_seed(),
            config_digest: self.config.digest(),
            snr_convention: &self.snr_convention,
            aggregation: "per-point median across trials",
            notes: &self.notes,
            config: &self.config,
        };
        toml::to_string(&sidecar).expect("metadata serializes")
    }
}

/// Path of the metadata file written next to `csv`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

/// Writes the table to `path` and the metadata to [`sidecar_path`]; returns both paths.
pub fn emit_curves(data: &CurveData, path: &Path) -> LabResult<(PathBuf, PathBuf)> {
    data.validate()?;
    let meta = sidecar_path(path);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    std::fs::write(path, data.to_csv()).map_err(|e| LabError::io(path, e))?;
    std::fs::write(&meta, data.metadata_toml()).map_err(|e| LabError::io(&meta, e))?;
    Ok((path.to_path_buf(), meta))
}
