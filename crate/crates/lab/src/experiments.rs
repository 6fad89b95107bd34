//! The two studies: MSE against adaptation cycles and BER against SNR.
//!
//! Trial `t` draws its link (codes and channels, fixed for the trial) from
//! substream `t` of the master seed. Every receiver trains on the same
//! `cycles` pilot blocks: one LMS-family update per block, while the GA
//! scores candidates on the sample cost over all of them. In the MSE study
//! the GA runs one generation per cycle; in the BER study it runs
//! `ga.max_cycles` generations. MSE is the two-symbol cost `C_N` on a
//! separate held-out set.

use std::collections::BTreeMap;

use mccdma_core::airlink::{snr_to_noise_variance, Link};
use mccdma_core::ga::run_ga_observed;
use mccdma_core::receivers::{
    analytic_autocorrelation, detect, fast_lms_step, lms_step, mmse_weights, Fitness, FullWeights,
    QuadraticCost, TrainingBatch, WeightPair,
};
use mccdma_core::SeededRng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::curves::{Axis, CurveData, Series};
use crate::error::LabResult;

/// Curve values are clipped here so diverged runs stay finite on disk.
pub const SATURATION: f64 = 1e12;

/// Smallest diagonal loading used for the exact MMSE weights.
pub const MIN_LOADING: f64 = 1e-9;

pub const GA: &str = "ga";
pub const MMSE: &str = "mmse";
pub const MMSE_GAUSSIAN: &str = "mmse_gaussian";

pub fn lms_name(mu: f64) -> String {
    format!("lms_mu{mu}")
}

pub fn fast_lms_name(mu: f64) -> String {
    format!("fast_lms_mu{mu}")
}

const SNR_CONVENTION: &str =
    "SNR_dB = -10 log10(noise_variance); unit-energy QPSK symbols, noise_variance per complex entry of the stacked vector";

fn series_names(cfg: &ExperimentConfig) -> Vec<String> {
    let mut names = vec![lms_name(cfg.lms_mu)];
    names.extend(cfg.fast_lms_mu.iter().map(|&mu| fast_lms_name(mu)));
    names.push(GA.into());
    names.push(MMSE.into());
    names
}

fn trial_link(cfg: &ExperimentConfig, trial: usize) -> LabResult<(Link, SeededRng)> {
    let mut rng = SeededRng::substream(cfg.master_seed(), trial as u64);
    let link = Link::generate(&cfg.system_config()?, &mut rng)?;
    Ok((link, rng))
}

fn exact_mmse(link: &Link, noise_variance: f64) -> LabResult<FullWeights> {
    let sigs = link.signatures();
    let r = analytic_autocorrelation(sigs, noise_variance.max(MIN_LOADING))?;
    let f = &sigs.user(0).f;
    Ok(mmse_weights(&r, &f[0], &f[1])?)
}

/// Final weights of every receiver after training.
struct Trained {
    lms: FullWeights,
    fast_lms: Vec<WeightPair>,
    ga: WeightPair,
    mmse: FullWeights,
}

impl Trained {
    fn all(&self) -> Vec<FullWeights> {
        let mut out = vec![self.lms.clone()];
        out.extend(self.fast_lms.iter().map(WeightPair::expand));
        out.push(self.ga.expand());
        out.push(self.mmse.clone());
        out
    }
}

/// Trains every receiver on `train`; with `heldout`, also records each
/// receiver's held-out cost after every cycle, in series order.
fn train_receivers(
    cfg: &ExperimentConfig,
    link: &Link,
    train: &TrainingBatch,
    noise_variance: f64,
    ga_generations: usize,
    ga_seed: u64,
    heldout: Option<&QuadraticCost>,
) -> LabResult<(Trained, Vec<Vec<f64>>)> {
    let m = link.signatures().subcarriers();
    let mut traces: Vec<Vec<f64>> = Vec::new();

    let mut lms = FullWeights::zeros(m);
    let mut trace = Vec::new();
    for b in train.blocks() {
        lms_step(&mut lms, &b.received, b.desired, cfg.lms_mu)?;
        if let Some(h) = heldout {
            let (c1, c2) = h.full_costs(&lms);
            trace.push(c1 + c2);
        }
    }
    traces.push(trace);

    let mut fast_lms = Vec::new();
    for &mu in &cfg.fast_lms_mu {
        let mut p = WeightPair::zeros(m);
        let mut trace = Vec::new();
        for b in train.blocks() {
            fast_lms_step(&mut p, &b.received, b.desired, mu)?;
            if let Some(h) = heldout {
                trace.push(h.total(&p));
            }
        }
        fast_lms.push(p);
        traces.push(trace);
    }

    let fitness = QuadraticCost::from_batch(train);
    let mut trace = Vec::new();
    let out = run_ga_observed(&cfg.ga_config(ga_generations, ga_seed)?, &fitness, |_, pop| {
        if let Some(h) = heldout {
            trace.push(h.total(&pop.best().genes));
        }
    })?;
    if let Some(&last) = trace.last() {
        // stopped at the threshold: the best individual no longer changes
        trace.resize(ga_generations, last);
    }
    traces.push(trace);

    let mmse = exact_mmse(link, noise_variance)?;
    if let Some(h) = heldout {
        let (c1, c2) = h.full_costs(&mmse);
        traces.push(vec![c1 + c2; cfg.cycles]);
    }

    Ok((
        Trained {
            lms,
            fast_lms,
            ga: out.best.genes,
            mmse,
        },
        traces,
    ))
}

fn saturate(v: f64, clipped: &mut usize) -> f64 {
    if v.is_finite() && v <= SATURATION {
        v
    } else {
        *clipped += 1;
        SATURATION
    }
}

/// Median with the mean of the middle pair for even counts.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `trials × series × points` → per-series medians; counts clipped values.
fn reduce(per_trial: &[Vec<Vec<f64>>], names: Vec<String>, clipped: &mut usize) -> Vec<Series> {
    names
        .into_iter()
        .enumerate()
        .map(|(s, name)| {
            let points = per_trial[0][s].len();
            let values = (0..points)
                .map(|i| {
                    let mut col: Vec<f64> = per_trial.iter().map(|t| saturate(t[s][i], clipped)).collect();
                    median(&mut col)
                })
                .collect();
            Series { name, values }
        })
        .collect()
}

fn mse_trial(cfg: &ExperimentConfig, trial: usize) -> LabResult<Vec<Vec<f64>>> {
    let (link, mut rng) = trial_link(cfg, trial)?;
    let sigma2 = cfg.system.noise_variance;
    let train = TrainingBatch::from_link(&link, cfg.cycles, sigma2, &mut rng.fork(1))?;
    let heldout = TrainingBatch::from_link(&link, cfg.heldout_blocks, sigma2, &mut rng.fork(2))?;
    let heldout = QuadraticCost::from_batch(&heldout);
    let ga_seed = rng.next_seed();
    let (_, traces) = train_receivers(cfg, &link, &train, sigma2, cfg.cycles, ga_seed, Some(&heldout))?;
    Ok(traces)
}

/// Median held-out MSE of every receiver after each of `cfg.cycles` cycles.
pub fn run_mse_vs_cycles(cfg: &ExperimentConfig) -> LabResult<CurveData> {
    cfg.validate(false)?;
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| mse_trial(cfg, t))
        .collect::<LabResult<Vec<_>>>()?;
    let mut clipped = 0;
    let series = reduce(&per_trial, series_names(cfg), &mut clipped);

    let mut notes = BTreeMap::new();
    notes.insert(
        "mse".into(),
        "two-symbol cost C_N = E|s1 - y1|^2 + E|s2 - y2|^2 on held-out blocks".into(),
    );
    notes.insert("heldout_blocks".into(), cfg.heldout_blocks.to_string());
    notes.insert("training_blocks".into(), cfg.cycles.to_string());
    notes.insert("noise_variance".into(), cfg.system.noise_variance.to_string());
    notes.insert("saturated_values".into(), clipped.to_string());
    notes.insert("saturation_level".into(), format!("{SATURATION:e}"));

    let data = CurveData {
        x_axis: Axis::new("cycle", "count"),
        y_axis: Axis::new("mse", "linear"),
        x: (1..=cfg.cycles).map(|c| c as f64).collect(),
        series,
        trials: cfg.trials,
        config: cfg.clone(),
        snr_convention: SNR_CONVENTION.into(),
        notes,
    };
    data.validate()?;
    Ok(data)
}

/// `Q(x) = P(N(0,1) > x)`.
fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// BER of the exact MMSE weights with interference treated as Gaussian.
fn mmse_gaussian_ber(link: &Link, w: &FullWeights, noise_variance: f64) -> LabResult<f64> {
    let sigs = link.signatures();
    let r = analytic_autocorrelation(sigs, noise_variance)?;
    let f = &sigs.user(0).f;
    let mut total = 0.0;
    for (wi, fi) in [(&w.w1, &f[0]), (&w.w2, &f[1])] {
        let gain = wi.inner(fi).norm();
        let power = wi.inner(&r.matrix().mul_vec(wi)?).re;
        let spread = power - gain * gain;
        total += if spread <= 0.0 { 0.0 } else { q_function(gain / spread.sqrt()) };
    }
    Ok(total / 2.0)
}

fn ga_generations(cfg: &ExperimentConfig) -> usize {
    cfg.ga.max_cycles.unwrap_or(cfg.cycles)
}

fn ber_job(cfg: &ExperimentConfig, trial: usize, point: usize) -> LabResult<Vec<f64>> {
    let (link, mut rng) = trial_link(cfg, trial)?;
    let mut rng = rng.fork(point as u64 + 1);
    let sigma2 = snr_to_noise_variance(cfg.snr_grid_db[point]);
    let train = TrainingBatch::from_link(&link, cfg.cycles, sigma2, &mut rng)?;
    let ga_seed = rng.next_seed();
    let (trained, _) = train_receivers(cfg, &link, &train, sigma2, ga_generations(cfg), ga_seed, None)?;
    let receivers = trained.all();

    let mut errors = vec![0u64; receivers.len()];
    for _ in 0..cfg.payload_blocks {
        let tx = link.transmit(sigma2, &mut rng)?;
        let sent = tx.desired().bits();
        for (w, e) in receivers.iter().zip(errors.iter_mut()) {
            let got = detect(w, &tx.received);
            *e += sent.iter().zip(got).filter(|(a, b)| **a != *b).count() as u64;
        }
    }
    let bits = 4.0 * cfg.payload_blocks as f64;
    let mut out: Vec<f64> = errors.iter().map(|&e| e as f64 / bits).collect();
    out.push(mmse_gaussian_ber(&link, &trained.mmse, sigma2)?);
    Ok(out)
}

/// Median BER of the desired user per SNR point.
pub fn run_ber_vs_snr(cfg: &ExperimentConfig) -> LabResult<CurveData> {
    cfg.validate(true)?;
    let points = cfg.snr_grid_db.len();
    let jobs: Vec<(usize, usize)> = (0..cfg.trials).flat_map(|t| (0..points).map(move |p| (t, p))).collect();
    let results = jobs
        .par_iter()
        .map(|&(t, p)| ber_job(cfg, t, p))
        .collect::<LabResult<Vec<_>>>()?;

    // regroup into trials × series × points
    let width = results[0].len();
    let per_trial: Vec<Vec<Vec<f64>>> = results
        .chunks(points)
        .map(|trial| (0..width).map(|s| trial.iter().map(|r| r[s]).collect()).collect())
        .collect();
    let mut names = series_names(cfg);
    names.push(MMSE_GAUSSIAN.into());
    let mut clipped = 0;
    let series = reduce(&per_trial, names, &mut clipped);

    let mut notes = BTreeMap::new();
    notes.insert("ber".into(), "bit errors of user 0 over both symbols of each block".into());
    notes.insert("bits_per_trial_point".into(), (4 * cfg.payload_blocks).to_string());
    notes.insert("training_blocks".into(), cfg.cycles.to_string());
    notes.insert("ga_generations".into(), ga_generations(cfg).to_string());
    notes.insert(
        MMSE_GAUSSIAN.into(),
        "exact MMSE weights, residual interference modelled as Gaussian".into(),
    );

    let data = CurveData {
        x_axis: Axis::new("snr", "dB"),
        y_axis: Axis::new("ber", "ratio"),
        x: cfg.snr_grid_db.clone(),
        series,
        trials: cfg.trials,
        config: cfg.clone(),
        snr_convention: SNR_CONVENTION.into(),
        notes,
    };
    data.validate()?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemSection;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            system: SystemSection {
                subcarriers: 4,
                users: 2,
                paths: 2,
                ..Default::default()
            },
            trials: 3,
            cycles: 20,
            heldout_blocks: 64,
            payload_blocks: 500,
            snr_grid_db: vec![0.0, 10.0],
            ..Default::default()
        }
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn one_cycle_gives_length_one_series() {
        let cfg = ExperimentConfig { cycles: 1, ..small() };
        let data = run_mse_vs_cycles(&cfg).unwrap();
        assert_eq!(data.series.len(), 5);
        assert!(data.series.iter().all(|s| s.values.len() == 1));
    }

    #[test]
    fn mse_series_names_and_bounds() {
        let data = run_mse_vs_cycles(&small()).unwrap();
        let names: Vec<&str> = data.series.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["lms_mu0.01", "fast_lms_mu0.02", "fast_lms_mu0.01", "ga", "mmse"]);
        let floor = data.series(MMSE).unwrap().values[0];
        assert!(floor > 0.0 && floor < 2.0);
        // zero initial weights cost 2; one small step cannot overshoot far
        assert!(data.series("lms_mu0.01").unwrap().values[0] <= 2.5);
    }

    #[test]
    fn every_trace_spans_every_cycle() {
        let cfg = small();
        let traces = mse_trial(&cfg, 0).unwrap();
        assert_eq!(traces.len(), 5);
        for t in &traces {
            assert_eq!(t.len(), cfg.cycles);
            assert!(t.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn threshold_stop_pads_the_ga_trace() {
        let mut cfg = small();
        cfg.ga.mse_threshold = 1e9;
        let traces = mse_trial(&cfg, 0).unwrap();
        let ga = &traces[3];
        assert_eq!(ga.len(), cfg.cycles);
        assert!(ga.iter().all(|&v| v == ga[0]));
    }

    #[test]
    fn ber_layout() {
        let data = run_ber_vs_snr(&small()).unwrap();
        assert_eq!(data.x, vec![0.0, 10.0]);
        assert_eq!(data.series.len(), 6);
        assert_eq!(data.series.last().unwrap().name, MMSE_GAUSSIAN);
        for s in &data.series {
            assert!(s.values.iter().all(|&b| (0.0..=1.0).contains(&b)), "{}", s.name);
        }
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-12);
        assert!((q_function(3.0) - 0.001_349_898_031_630_1).abs() < 1e-12);
    }
}
