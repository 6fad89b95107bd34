//! Algebraic property suites behind `verify` and `selftest`.
//!
//! Each suite draws random instances from its own seeded stream and reports
//! the worst deviation it saw next to the tolerance it is judged against.

use std::fmt;

use mccdma_core::airlink::{
    draw_symbols, synthesize_received, two_interval_oracle, ChipScale, Link, SystemConfig,
};
use mccdma_core::ga::{run_ga, GaConfig};
use mccdma_core::numerics::gaussian_complex;
use mccdma_core::receivers::{
    analytic_autocorrelation, detect, mmse_cost, mmse_weights, reduced_cost, reduced_cost_gradient,
    verify_block_symmetry, QuadraticCost, TrainingBatch, WeightPair,
};
use mccdma_core::{CVector, SeededRng, C64};

use crate::error::LabResult;
use crate::experiments::{median, MIN_LOADING};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub instances: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} {:>8} instances  worst {:.3e}  tolerance {:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.worst,
            self.tolerance,
        )
    }
}

/// Random small system: `M` from `dims`, `U` from `users`, 1..=3 paths,
/// noise power uniform on `[0.01, 1)`.
fn random_link(dims: &[usize], users: &[usize], rng: &mut SeededRng) -> LabResult<(Link, f64)> {
    let m = dims[rng.below(dims.len())];
    let cfg = SystemConfig {
        subcarriers: m,
        users: users[rng.below(users.len())],
        paths: rng.range(1, m.min(3) + 1),
        noise_variance: 0.01 + 0.99 * rng.uniform(),
        chip_scale: ChipScale::UnitNormCode,
        master_seed: 0,
    };
    let noise = cfg.noise_variance;
    Ok((Link::generate(&cfg, rng)?, noise))
}

/// Stacked synthesis against the two-interval simulation.
pub fn stacking_equivalence(seed: u64, instances: usize, dims: &[usize], users: &[usize]) -> LabResult<SuiteReport> {
    let mut rng = SeededRng::substream(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (link, noise) = random_link(dims, users, &mut rng)?;
        let m = link.signatures().subcarriers();
        let symbols = draw_symbols(link.codes().len(), &mut rng)?;
        let n1 = gaussian_complex(m, noise, &mut rng)?;
        let n2 = gaussian_complex(m, noise, &mut rng)?;
        let stacked = synthesize_received(link.signatures(), &symbols, &CVector::concat(&n1, &n2.conj()))?;
        let oracle = two_interval_oracle(link.codes(), link.channel(), &symbols, &n1, &n2)?;
        worst = worst.max(stacked.max_abs_diff(&oracle));
    }
    Ok(SuiteReport {
        name: "stacking_equivalence",
        instances,
        worst,
        tolerance: 1e-12,
    })
}

/// `R_d = conj(R_a)` and `R_c = -conj(R_b)` for the analytic autocorrelation.
pub fn block_symmetry(seed: u64, instances: usize, dims: &[usize], users: &[usize]) -> LabResult<SuiteReport> {
    let mut rng = SeededRng::substream(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (link, noise) = random_link(dims, users, &mut rng)?;
        let r = analytic_autocorrelation(link.signatures(), noise)?;
        worst = worst.max(verify_block_symmetry(&r));
    }
    Ok(SuiteReport {
        name: "block_symmetry",
        instances,
        worst,
        tolerance: 1e-10,
    })
}

/// `w_b = conj(w_c)`, `w_d = -conj(w_a)` for the unconstrained MMSE pair,
/// relative to the largest weight.
pub fn weight_relationship(seed: u64, instances: usize, dims: &[usize], users: &[usize]) -> LabResult<SuiteReport> {
    let mut rng = SeededRng::substream(seed, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (link, noise) = random_link(dims, users, &mut rng)?;
        let r = analytic_autocorrelation(link.signatures(), noise)?;
        let f = &link.signatures().user(0).f;
        let w = mmse_weights(&r, &f[0], &f[1])?;
        worst = worst.max(w.relationship_violation() / w.max_abs());
    }
    Ok(SuiteReport {
        name: "weight_relationship",
        instances,
        worst,
        tolerance: 1e-8,
    })
}

/// Systems used for the Monte-Carlo cost check: the full-size uplink and two
/// smaller ones.
pub const COST_SYSTEMS: [(usize, usize, usize); 3] = [(32, 20, 3), (8, 4, 3), (2, 1, 2)];

/// Sample cost of the MMSE pair over `samples` fresh blocks against the
/// closed-form minimum, as a relative error, plus the analytic gradient
/// norm at that pair.
pub fn cost_consistency(seed: u64, samples: usize) -> LabResult<[SuiteReport; 2]> {
    const CHUNK: usize = 10_000;
    let mut rel: f64 = 0.0;
    let mut grad: f64 = 0.0;
    for (i, &(m, u, paths)) in COST_SYSTEMS.iter().enumerate() {
        let cfg = SystemConfig {
            subcarriers: m,
            users: u,
            paths,
            noise_variance: 0.1,
            chip_scale: ChipScale::UnitNormCode,
            master_seed: seed,
        };
        let mut rng = SeededRng::substream(seed, 10 + i as u64);
        let link = Link::generate(&cfg, &mut rng)?;
        let r = analytic_autocorrelation(link.signatures(), cfg.noise_variance)?;
        let f = &link.signatures().user(0).f;
        let pair = mmse_weights(&r, &f[0], &f[1])?.to_pair();
        let c_min = mmse_cost(&r, &f[0], &f[1])?;

        let mut sum = 0.0;
        let mut left = samples;
        while left > 0 {
            let n = left.min(CHUNK);
            let batch = TrainingBatch::from_link(&link, n, cfg.noise_variance, &mut rng)?;
            sum += reduced_cost(&pair, &batch)? * n as f64;
            left -= n;
        }
        rel = rel.max((sum / samples as f64 - c_min).abs() / c_min);

        let (ga, gc) = QuadraticCost::analytic(&r, &f[0], &f[1])?.gradient(&pair);
        grad = grad.max((ga.norm_sqr() + gc.norm_sqr()).sqrt());
    }
    Ok([
        SuiteReport {
            name: "cost_monte_carlo",
            instances: COST_SYSTEMS.len(),
            worst: rel,
            tolerance: 1e-2,
        },
        SuiteReport {
            name: "mmse_stationarity",
            instances: COST_SYSTEMS.len(),
            worst: grad,
            tolerance: 1e-8,
        },
    ])
}

fn random_pair(m: usize, rng: &mut SeededRng) -> WeightPair {
    WeightPair {
        wa: (0..m).map(|_| rng.complex_normal(0.5)).collect(),
        wc: (0..m).map(|_| rng.complex_normal(0.5)).collect(),
    }
}

/// Conjugate Wirtinger gradient of the reduced cost against central
/// differences, relative to the largest gradient entry.
pub fn gradient_check(seed: u64, probes: usize) -> LabResult<SuiteReport> {
    const STEP: f64 = 1e-5;
    let mut rng = SeededRng::substream(seed, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let (link, noise) = random_link(&[2, 4, 8], &[1, 2, 3], &mut rng)?;
        let batch = TrainingBatch::from_link(&link, 16, noise, &mut rng)?;
        let p = random_pair(link.signatures().subcarriers(), &mut rng);
        let (ga, gc) = reduced_cost_gradient(&p, &batch)?;
        let analytic: Vec<C64> = ga.iter().chain(gc.iter()).copied().collect();
        let scale = analytic.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, a) in analytic.iter().enumerate() {
            let mut d = [0.0; 2];
            for (k, dir) in [C64::new(STEP, 0.0), C64::new(0.0, STEP)].into_iter().enumerate() {
                let mut plus = p.clone();
                *plus.gene_mut(i) += dir;
                let mut minus = p.clone();
                *minus.gene_mut(i) -= dir;
                d[k] = (reduced_cost(&plus, &batch)? - reduced_cost(&minus, &batch)?) / (2.0 * STEP);
            }
            let fd = C64::new(d[0] / 2.0, d[1] / 2.0);
            worst = worst.max((a - fd).norm() / scale);
        }
    }
    Ok(SuiteReport {
        name: "gradient_check",
        instances: probes,
        worst,
        tolerance: 1e-5,
    })
}

/// Settings for the small-system GA optimality check.
pub fn desk_ga_config(seed: u64, cycles: usize) -> GaConfig {
    GaConfig {
        max_cycles: cycles,
        init_scale: 0.5,
        seed,
        ..GaConfig::default()
    }
}

/// GA on the exact cost of an `M = 2`, single-user link at `σ² = 0.01`:
/// median over seeds of `best / C_min - 1`.
pub fn ga_optimality(seed: u64, seeds: usize, cycles: usize) -> LabResult<SuiteReport> {
    let cfg = SystemConfig {
        subcarriers: 2,
        users: 1,
        paths: 2,
        noise_variance: 0.01,
        chip_scale: ChipScale::UnitNormCode,
        master_seed: seed,
    };
    let mut excess = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let mut rng = SeededRng::substream(seed, 100 + s as u64);
        let link = Link::generate(&cfg, &mut rng)?;
        let r = analytic_autocorrelation(link.signatures(), cfg.noise_variance)?;
        let f = &link.signatures().user(0).f;
        let c_min = mmse_cost(&r, &f[0], &f[1])?;
        let fitness = QuadraticCost::analytic(&r, &f[0], &f[1])?;
        let out = run_ga(&desk_ga_config(rng.next_seed(), cycles), &fitness)?;
        let best = out.best.fitness().expect("ranked individuals are evaluated");
        excess.push(best / c_min - 1.0);
    }
    Ok(SuiteReport {
        name: "ga_optimality",
        instances: seeds,
        worst: median(&mut excess),
        tolerance: 0.05,
    })
}

/// Bit errors of the near-exact MMSE receiver on a noiseless single-user link.
pub fn noiseless_detection(seed: u64, blocks: usize, m: usize) -> LabResult<SuiteReport> {
    let cfg = SystemConfig {
        subcarriers: m,
        users: 1,
        paths: m.min(3),
        noise_variance: 0.0,
        chip_scale: ChipScale::UnitNormCode,
        master_seed: seed,
    };
    let mut rng = SeededRng::substream(seed, 6);
    let link = Link::generate(&cfg, &mut rng)?;
    let r = analytic_autocorrelation(link.signatures(), MIN_LOADING)?;
    let f = &link.signatures().user(0).f;
    let w = mmse_weights(&r, &f[0], &f[1])?;
    let mut errors = 0usize;
    for _ in 0..blocks {
        let tx = link.transmit(0.0, &mut rng)?;
        let got = detect(&w, &tx.received);
        errors += tx.desired().bits().iter().zip(got).filter(|(a, b)| **a != *b).count();
    }
    Ok(SuiteReport {
        name: "noiseless_detection",
        instances: blocks,
        worst: errors as f64,
        tolerance: 0.0,
    })
}

/// The algebraic suites at full size.
pub fn verify_suites(seed: u64) -> LabResult<Vec<SuiteReport>> {
    let dims = [2, 4, 8];
    let users = [1, 2, 3];
    let wide = [2, 4, 8, 16, 32];
    let crowd = [1, 2, 5, 10, 20];
    let mut out = vec![
        stacking_equivalence(seed, 1000, &dims, &users)?,
        block_symmetry(seed, 500, &wide, &crowd)?,
        weight_relationship(seed, 500, &wide, &crowd)?,
    ];
    out.extend(cost_consistency(seed, 1_000_000)?);
    out.push(gradient_check(seed, 200)?);
    Ok(out)
}

/// Quick oracle checks on two-subcarrier systems.
pub fn selftest_suites(seed: u64) -> LabResult<Vec<SuiteReport>> {
    Ok(vec![
        stacking_equivalence(seed, 100, &[2], &[1, 2])?,
        block_symmetry(seed, 100, &[2], &[1, 2])?,
        weight_relationship(seed, 100, &[2], &[1, 2])?,
        noiseless_detection(seed, 1000, 2)?,
        ga_optimality(seed, 5, 2000)?,
    ])
}
