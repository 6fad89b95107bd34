//! The `mccdma` command line.
//!
//! Exit status: 0 on success, 1 when a run or a verification fails,
//! 2 on usage or configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{snr_grid, ExperimentConfig};
use crate::curves::{emit_curves, CurveData};
use crate::error::{LabError, LabResult};
use crate::experiments::{run_ber_vs_snr, run_mse_vs_cycles};
use crate::verify::{selftest_suites, verify_suites, SuiteReport};

#[derive(Parser, Debug)]
#[command(name = "mccdma", version, about = "Space-time coded MC-CDMA receiver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML experiment configuration; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; metadata goes to `<path>.meta.toml`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Adaptation cycles, which is also the training-block budget.
    #[arg(long)]
    cycles: Option<usize>,
    /// GA parent selection: eugenic, alpha_male, preferred or random.
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    crossover_ratio: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// MSE against adaptation cycles.
    MseCurve(Common),
    /// BER against SNR.
    BerCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snr_min: Option<f64>,
        #[arg(long)]
        snr_max: Option<f64>,
        #[arg(long)]
        snr_step: Option<f64>,
    },
    /// Algebraic property suites at full size.
    Verify(CheckArgs),
    /// Fast oracle checks on two-subcarrier systems.
    Selftest(CheckArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(common: &Common) -> LabResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.system.master_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(c) = common.cycles {
        cfg.cycles = c;
    }
    if let Some(s) = &common.selection {
        cfg.ga.selection = s.clone();
    }
    if let Some(r) = common.crossover_ratio {
        cfg.ga.crossover_ratio = r;
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

fn output_path(cfg: &ExperimentConfig, fallback: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from(fallback))
}

fn write_curve(data: &CurveData, path: &Path, stdout: &mut dyn Write) -> LabResult<()> {
    let (csv, meta) = emit_curves(data, path)?;
    let _ = writeln!(stdout, "wrote {} and {}", csv.display(), meta.display());
    for s in &data.series {
        let _ = writeln!(stdout, "  {:<20} last point {:.4e}", s.name, s.values.last().copied().unwrap_or(0.0));
    }
    Ok(())
}

fn report(reports: &[SuiteReport], out: Option<&Path>, stdout: &mut dyn Write) -> LabResult<()> {
    let mut text = String::new();
    for r in reports {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    text.push_str(&format!("{passed}/{} suites passed\n", reports.len()));
    let _ = stdout.write_all(text.as_bytes());
    if let Some(p) = out {
        std::fs::write(p, &text).map_err(|e| LabError::Io {
            path: p.to_path_buf(),
            source: e,
        })?;
    }
    if passed == reports.len() {
        Ok(())
    } else {
        Err(LabError::Verification(format!("{} suite(s) failed", reports.len() - passed)))
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> LabResult<()> {
    match command {
        Command::MseCurve(common) => {
            let cfg = load(&common)?;
            let data = run_mse_vs_cycles(&cfg)?;
            write_curve(&data, &output_path(&cfg, "mse_curve.csv"), stdout)
        }
        Command::BerCurve {
            common,
            snr_min,
            snr_max,
            snr_step,
        } => {
            let mut cfg = load(&common)?;
            if snr_min.is_some() || snr_max.is_some() || snr_step.is_some() {
                cfg.snr_grid_db = snr_grid(snr_min.unwrap_or(0.0), snr_max.unwrap_or(20.0), snr_step.unwrap_or(2.0))?;
            }
            let data = run_ber_vs_snr(&cfg)?;
            write_curve(&data, &output_path(&cfg, "ber_curve.csv"), stdout)
        }
        Command::Verify(a) => report(&verify_suites(a.seed)?, a.out.as_deref(), stdout),
        Command::Selftest(a) => report(&selftest_suites(a.seed)?, a.out.as_deref(), stdout),
    }
}

/// Runs the command line given as `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
