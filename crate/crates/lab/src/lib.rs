//! Experiment runner for the `mccdma-core` receivers.
//!
//! Two studies are provided: MSE against adaptation cycles and BER against
//! SNR, each repeated over independent seeded trials and reduced to
//! per-point medians. Results are written as CSV plus a TOML sidecar.

pub mod cli;
pub mod config;
pub mod curves;
mod error;
pub mod experiments;
pub mod verify;

pub use config::ExperimentConfig;
pub use curves::{emit_curves, CurveData, Series};
pub use error::{LabError, LabResult};
pub use experiments::{run_ber_vs_snr, run_mse_vs_cycles};
