//! Experiment configuration, loadable from TOML.
//!
//! Every field is optional; missing ones take the defaults below. Example:
//!
//! ```toml
//! trials = 50
//! cycles = 500
//! fast_lms_mu = [0.02, 0.01]
//!
//! [system]
//! users = 20
//! noise_variance = 0.1
//!
//! [ga]
//! selection = "preferred"
//! ```

use std::path::{Path, PathBuf};

use mccdma_core::airlink::{ChipScale, SystemConfig};
use mccdma_core::ga::{GaConfig, Selection};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub subcarriers: usize,
    pub users: usize,
    pub paths: usize,
    /// Noise power for the MSE study; the BER study sweeps it from the SNR grid.
    pub noise_variance: f64,
    /// `"unit_norm_code"` or `"unit_chip"`.
    pub chip_scale: String,
    pub master_seed: u64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let d = SystemConfig::default();
        SystemSection {
            subcarriers: d.subcarriers,
            users: d.users,
            paths: d.paths,
            noise_variance: d.noise_variance,
            chip_scale: chip_scale_name(d.chip_scale).to_string(),
            master_seed: d.master_seed,
        }
    }
}

fn chip_scale_name(s: ChipScale) -> &'static str {
    match s {
        ChipScale::UnitChip => "unit_chip",
        ChipScale::UnitNormCode => "unit_norm_code",
    }
}

/// GA settings. The seed is derived per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub population_size: usize,
    pub selection: String,
    pub crossover_ratio: f64,
    pub mutants_per_generation: usize,
    pub mse_threshold: f64,
    pub init_scale: f64,
    pub mutation_bits: u32,
    pub mutation_quantum: f64,
    /// Generations in the BER study, all scored on the same `cycles` pilot
    /// blocks; unset means `cycles`. The MSE study always runs one
    /// generation per cycle.
    pub max_cycles: Option<usize>,
}

impl Default for GaSection {
    fn default() -> Self {
        let d = GaConfig::default();
        GaSection {
            population_size: d.population_size,
            selection: d.selection.name().to_string(),
            crossover_ratio: d.crossover_ratio,
            mutants_per_generation: d.mutants_per_generation,
            mse_threshold: d.mse_threshold,
            init_scale: d.init_scale,
            mutation_bits: d.mutation_bits,
            mutation_quantum: d.mutation_quantum,
            max_cycles: Some(2000),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub ga: GaSection,
    pub lms_mu: f64,
    pub fast_lms_mu: Vec<f64>,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    /// Adaptation cycles; also the number of training blocks every receiver gets.
    pub cycles: usize,
    /// Held-out blocks on which MSE curves are measured.
    pub heldout_blocks: usize,
    /// Payload blocks per SNR point and trial in the BER study.
    pub payload_blocks: usize,
    /// Where curves are written. Not part of the digest or the sidecar, so
    /// identical runs produce identical files wherever they land.
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemSection::default(),
            ga: GaSection::default(),
            lms_mu: 0.01,
            fast_lms_mu: vec![0.02, 0.01],
            snr_grid_db: snr_grid(0.0, 20.0, 2.0).expect("default grid"),
            trials: 20,
            cycles: 500,
            heldout_blocks: 256,
            payload_blocks: 100_000,
            output: None,
        }
    }
}

/// `lo, lo + step, ...` up to and including `hi`.
pub fn snr_grid(lo: f64, hi: f64, step: f64) -> LabResult<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(LabError::config("snr_grid_db", "need finite bounds with min <= max"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(LabError::config("snr_grid_db", "step must be positive"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn positive(field: &str, v: f64) -> LabResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(field, "must be positive and finite"))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Parse { message, .. } => LabError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> LabResult<Self> {
        toml::from_str(text).map_err(|e| LabError::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn master_seed(&self) -> u64 {
        self.system.master_seed
    }

    pub fn system_config(&self) -> LabResult<SystemConfig> {
        let chip_scale = match self.system.chip_scale.as_str() {
            "unit_norm_code" => ChipScale::UnitNormCode,
            "unit_chip" => ChipScale::UnitChip,
            _ => {
                return Err(LabError::config(
                    "system.chip_scale",
                    "expected unit_norm_code or unit_chip",
                ))
            }
        };
        let cfg = SystemConfig {
            subcarriers: self.system.subcarriers,
            users: self.system.users,
            paths: self.system.paths,
            noise_variance: self.system.noise_variance,
            chip_scale,
            master_seed: self.system.master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn selection(&self) -> LabResult<Selection> {
        self.ga
            .selection
            .parse()
            .map_err(|_| LabError::config("ga.selection", "expected eugenic, alpha_male, preferred or random"))
    }

    /// GA settings for one run of `generations` cycles with the given seed.
    pub fn ga_config(&self, generations: usize, seed: u64) -> LabResult<GaConfig> {
        let g = &self.ga;
        let cfg = GaConfig {
            population_size: g.population_size,
            selection: self.selection()?,
            crossover_ratio: g.crossover_ratio,
            mutants_per_generation: g.mutants_per_generation,
            max_cycles: generations,
            mse_threshold: g.mse_threshold,
            init_scale: g.init_scale,
            mutation_bits: g.mutation_bits,
            mutation_quantum: g.mutation_quantum,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything both studies need; `ber` adds the SNR grid.
    pub fn validate(&self, ber: bool) -> LabResult<()> {
        if self.trials == 0 {
            return Err(LabError::config("trials", "must be at least 1"));
        }
        if self.cycles == 0 {
            return Err(LabError::config("cycles", "must be at least 1"));
        }
        if self.heldout_blocks == 0 {
            return Err(LabError::config("heldout_blocks", "must be at least 1"));
        }
        if self.payload_blocks == 0 {
            return Err(LabError::config("payload_blocks", "must be at least 1"));
        }
        positive("lms_mu", self.lms_mu)?;
        for &mu in &self.fast_lms_mu {
            positive("fast_lms_mu", mu)?;
        }
        if ber {
            if self.snr_grid_db.is_empty() {
                return Err(LabError::config("snr_grid_db", "must not be empty"));
            }
            if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
                return Err(LabError::config("snr_grid_db", "values must be finite"));
            }
        }
        if self.ga.max_cycles == Some(0) {
            return Err(LabError::config("ga.max_cycles", "must be at least 1"));
        }
        self.system_config()?;
        self.ga_config(self.cycles, 0)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        c.validate(true).unwrap();
        assert_eq!(c.snr_grid_db.len(), 11);
        assert_eq!(c.snr_grid_db[10], 20.0);
        assert_eq!(c.fast_lms_mu, vec![0.02, 0.01]);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);

        let partial = ExperimentConfig::from_toml("trials = 3\n[ga]\nselection = \"random\"\n").unwrap();
        assert_eq!(partial.trials, 3);
        assert_eq!(partial.selection().unwrap(), Selection::Random);
        assert_eq!(partial.system, SystemSection::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("trails = 3\n").is_err());
    }

    #[test]
    fn invalid_fields_are_named() {
        let mut c = ExperimentConfig { cycles: 0, ..Default::default() };
        let e = c.validate(false).unwrap_err();
        assert!(e.to_string().contains("cycles"), "{e}");
        assert_eq!(e.exit_code(), 2);

        c.cycles = 10;
        c.snr_grid_db.clear();
        assert!(c.validate(false).is_ok());
        assert!(c.validate(true).unwrap_err().to_string().contains("snr_grid_db"));

        let c = ExperimentConfig {
            system: SystemSection { subcarriers: 12, ..Default::default() },
            ..Default::default()
        };
        let e = c.validate(false).unwrap_err();
        assert!(e.to_string().contains("subcarriers"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn grid_construction() {
        assert_eq!(snr_grid(0.0, 20.0, 2.0).unwrap().len(), 11);
        assert_eq!(snr_grid(5.0, 5.0, 1.0).unwrap(), vec![5.0]);
        assert_eq!(snr_grid(0.0, 1.0, 0.3).unwrap().len(), 4);
        assert!(snr_grid(1.0, 0.0, 1.0).is_err());
        assert!(snr_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { trials: 21, ..Default::default() };
        assert_eq!(a.digest(), ExperimentConfig::default().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
