//! Genetic-algorithm search over the reduced weight pair.
//!
//! An individual's chromosome is the `2M` complex entries of a
//! [`WeightPair`], one entry per gene (`w_a` first, then `w_c`). Each real
//! and imaginary component is read as a sign–magnitude fixed-point number
//! with quantum `q`; the magnitude code is Gray-coded, so flipping one of its
//! bits moves the component by a power-of-two multiple of `q` and flipping
//! the least significant bits gives the `±q` neighbours. Flipping the sign
//! bit negates the component.
//!
//! One cycle:
//! 1. pick two parents from the ranked population,
//! 2. cross them at a fixed cut into two children,
//! 3. clone the best `N` individuals and flip one bit in each,
//! 4. score the new individuals,
//! 5. keep the per-filter winners `argmin C_N1`, `argmin C_N2` plus the
//!    lowest-total rest, and re-rank.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{c, SeededRng, C64};
use crate::receivers::{Fitness, WeightPair};

/// Parent selection strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Selection {
    /// The two best individuals.
    Eugenic,
    /// The best individual and a uniform pick from the rest.
    AlphaMale,
    /// `p1` uniform over ranks `2..size-1` (1-based), `p2` uniform over the
    /// individuals ranked above `p1`.
    #[default]
    Preferred,
    /// Two distinct uniform picks.
    Random,
}

impl Selection {
    pub const ALL: [Selection; 4] = [
        Selection::Eugenic,
        Selection::AlphaMale,
        Selection::Preferred,
        Selection::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Selection::Eugenic => "eugenic",
            Selection::AlphaMale => "alpha_male",
            Selection::Preferred => "preferred",
            Selection::Random => "random",
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eugenic" => Ok(Selection::Eugenic),
            "alpha_male" | "alpha-male" => Ok(Selection::AlphaMale),
            "preferred" => Ok(Selection::Preferred),
            "random" => Ok(Selection::Random),
            _ => Err(Error::Config {
                field: "selection",
                reason: "expected eugenic, alpha_male, preferred or random",
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub selection: Selection,
    /// Fraction of genes the first child takes from the first parent.
    pub crossover_ratio: f64,
    /// Mutants per generation, each cloned from a distinct top-ranked individual.
    pub mutants_per_generation: usize,
    pub max_cycles: usize,
    /// Stop once the best total cost reaches this value.
    pub mse_threshold: f64,
    /// Standard deviation scale of the initial genes (`E|g|² = init_scale²`).
    pub init_scale: f64,
    /// Magnitude bits open to mutation; `0` restricts mutation to sign flips.
    pub mutation_bits: u32,
    /// Fixed-point quantum `q`; genes are kept on the grid `q·ℤ`.
    pub mutation_quantum: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 32,
            selection: Selection::Preferred,
            crossover_ratio: 0.75,
            mutants_per_generation: 32,
            max_cycles: 500,
            mse_threshold: 1e-3,
            init_scale: 0.1,
            mutation_bits: 12,
            mutation_quantum: 1.0 / 4096.0,
            seed: 1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |field, reason| Err(Error::Config { field, reason });
        if self.population_size < 4 {
            return err("population_size", "must be at least 4");
        }
        if !(self.crossover_ratio > 0.0 && self.crossover_ratio < 1.0) {
            return err("crossover_ratio", "must lie strictly between 0 and 1");
        }
        if self.mutants_per_generation > self.population_size {
            return err("mutants_per_generation", "must not exceed population_size");
        }
        if self.max_cycles == 0 {
            return err("max_cycles", "must be at least 1");
        }
        if self.mse_threshold.is_nan() {
            return err("mse_threshold", "must be a number");
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return err("init_scale", "must be finite and non-negative");
        }
        if self.mutation_bits > 40 {
            return err("mutation_bits", "must not exceed 40");
        }
        if self.mutation_bits > 0 && !(self.mutation_quantum > 0.0 && self.mutation_quantum.is_finite()) {
            return err("mutation_quantum", "must be positive when magnitude bits are mutated");
        }
        Ok(())
    }

    fn quantum(&self) -> Option<f64> {
        (self.mutation_quantum > 0.0).then_some(self.mutation_quantum)
    }
}

/// A candidate weight pair with its cached sub-costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genes: WeightPair,
    costs: Option<(f64, f64)>,
}

impl Individual {
    pub fn new(genes: WeightPair) -> Self {
        Individual { genes, costs: None }
    }

    pub fn evaluate(&mut self, fitness: &impl Fitness) {
        let (a, b) = fitness.costs(&self.genes);
        // NaN would break the ranking; treat it as the worst possible cost
        let fix = |x: f64| if x.is_nan() { f64::INFINITY } else { x };
        self.costs = Some((fix(a), fix(b)));
    }

    pub fn evaluated(mut self, fitness: &impl Fitness) -> Self {
        self.evaluate(fitness);
        self
    }

    /// `(C_N1, C_N2)`, if evaluated since the last change.
    pub fn sub_costs(&self) -> Option<(f64, f64)> {
        self.costs
    }

    /// Total cost `C_N`, if evaluated.
    pub fn fitness(&self) -> Option<f64> {
        self.costs.map(|(a, b)| a + b)
    }

    fn total(&self) -> f64 {
        self.fitness().expect("individual evaluated before ranking")
    }
}

/// Individuals ranked by ascending total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    individuals: Vec<Individual>,
}

impl Population {
    /// Evaluates any stale individuals and ranks them.
    pub fn new(mut individuals: Vec<Individual>, fitness: &impl Fitness) -> Self {
        for ind in &mut individuals {
            if ind.costs.is_none() {
                ind.evaluate(fitness);
            }
        }
        individuals.sort_by(|a, b| a.total().total_cmp(&b.total()));
        Population { individuals }
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn best(&self) -> &Individual {
        &self.individuals[0]
    }

    pub fn best_fitness(&self) -> f64 {
        self.best().total()
    }

    pub fn mean_fitness(&self) -> f64 {
        self.individuals.iter().map(Individual::total).sum::<f64>() / self.len() as f64
    }

    pub fn is_sorted(&self) -> bool {
        self.individuals.windows(2).all(|w| w[0].total() <= w[1].total())
    }
}

/// Per-cycle best and mean total cost.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaTrace {
    pub best: Vec<f64>,
    pub mean: Vec<f64>,
}

impl GaTrace {
    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitPosition {
    Sign,
    /// Gray-coded magnitude bit, 0 being least significant.
    Magnitude(u32),
}

/// Where a mutation lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MutationSite {
    pub gene: usize,
    pub component: Component,
    pub bit: BitPosition,
}

impl MutationSite {
    /// Uniform gene, uniform component, and a bit uniform over the sign bit
    /// and `magnitude_bits` magnitude bits.
    pub fn random(gene_count: usize, magnitude_bits: u32, rng: &mut SeededRng) -> Self {
        let gene = rng.below(gene_count);
        let component = if rng.coin() { Component::Im } else { Component::Re };
        let b = rng.below(magnitude_bits as usize + 1) as u32;
        let bit = if b == magnitude_bits {
            BitPosition::Sign
        } else {
            BitPosition::Magnitude(b)
        };
        MutationSite { gene, component, bit }
    }
}

fn gray_decode(mut g: u64) -> u64 {
    let mut n = 0;
    while g != 0 {
        n ^= g;
        g >>= 1;
    }
    n
}

/// Flips Gray-coded magnitude bit `k` of `v` read in units of `quantum`,
/// keeping the sign and the sub-quantum remainder.
fn flip_magnitude_bit(v: f64, k: u32, quantum: f64) -> f64 {
    let mag = libm::fabs(v);
    let n = libm::floor(mag / quantum) as u64;
    let rem = mag - n as f64 * quantum;
    let g = (n ^ (n >> 1)) ^ (1u64 << k);
    let flipped = gray_decode(g) as f64 * quantum + rem;
    libm::copysign(flipped, v)
}

fn quantize(v: f64, quantum: f64) -> f64 {
    libm::round(v / quantum) * quantum
}

/// Applies one bit flip at `site`; the result is unevaluated.
///
/// Flipping the same site twice restores the original value exactly for
/// genes on the quantum grid.
pub fn mutate_at(ind: &Individual, site: MutationSite, quantum: f64) -> Individual {
    let mut genes = ind.genes.clone();
    let g = genes.gene_mut(site.gene);
    let v = match site.component {
        Component::Re => g.re,
        Component::Im => g.im,
    };
    let nv = match site.bit {
        BitPosition::Sign => -v,
        BitPosition::Magnitude(k) => flip_magnitude_bit(v, k, quantum),
    };
    match site.component {
        Component::Re => g.re = nv,
        Component::Im => g.im = nv,
    }
    Individual::new(genes)
}

/// Random single-bit mutation under `cfg`.
pub fn mutate(ind: &Individual, cfg: &GaConfig, rng: &mut SeededRng) -> Individual {
    let site = MutationSite::random(ind.genes.gene_count(), cfg.mutation_bits, rng);
    mutate_at(ind, site, cfg.mutation_quantum)
}

/// Random initial population, ranked.
pub fn init_population(cfg: &GaConfig, fitness: &impl Fitness, rng: &mut SeededRng) -> Result<Population> {
    cfg.validate()?;
    let m = fitness.half();
    let var = cfg.init_scale * cfg.init_scale;
    let q = cfg.quantum();
    let draw = |rng: &mut SeededRng| -> C64 {
        let z = rng.complex_normal(var);
        match q {
            Some(q) => c(quantize(z.re, q), quantize(z.im, q)),
            None => z,
        }
    };
    let individuals = (0..cfg.population_size)
        .map(|_| {
            let wa = (0..m).map(|_| draw(rng)).collect();
            let wc = (0..m).map(|_| draw(rng)).collect();
            Individual::new(WeightPair { wa, wc })
        })
        .collect();
    Ok(Population::new(individuals, fitness))
}

/// Picks parent ranks (0-based) from a ranked population.
pub fn select_parents(pop: &Population, strategy: Selection, rng: &mut SeededRng) -> Result<(usize, usize)> {
    let n = pop.len();
    let need = if strategy == Selection::Preferred { 4 } else { 2 };
    if n < need {
        return Err(Error::Config {
            field: "population_size",
            reason: "too small for the selection strategy",
        });
    }
    Ok(match strategy {
        Selection::Eugenic => (0, 1),
        Selection::AlphaMale => (0, rng.range(1, n)),
        Selection::Preferred => {
            let first = rng.range(1, n - 1);
            (first, rng.below(first))
        }
        Selection::Random => {
            let first = rng.below(n);
            let mut second = rng.below(n - 1);
            if second >= first {
                second += 1;
            }
            (first, second)
        }
    })
}

/// Single-cut crossover: the first child takes the first `round(ratio·G)`
/// genes from `p1` and the rest from `p2`; the second child is the complement.
pub fn crossover(p1: &Individual, p2: &Individual, ratio: f64) -> (Individual, Individual) {
    let g = p1.genes.gene_count();
    debug_assert_eq!(g, p2.genes.gene_count());
    let cut = (libm::round(ratio * g as f64) as usize).min(g);
    let mut c1 = p1.genes.clone();
    let mut c2 = p2.genes.clone();
    for i in cut..g {
        *c1.gene_mut(i) = p2.genes.gene(i);
        *c2.gene_mut(i) = p1.genes.gene(i);
    }
    (Individual::new(c1), Individual::new(c2))
}

/// Merges evaluated `candidates` into `pop` and keeps `size` individuals:
/// the pool's `argmin C_N1` and `argmin C_N2` unconditionally, then the
/// lowest totals. Ties keep the earlier pool entry, incumbents first.
pub fn replace_generation(pop: Population, candidates: Vec<Individual>, size: usize) -> Population {
    let mut pool = pop.individuals;
    pool.extend(candidates);
    let costs: Vec<(f64, f64)> = pool
        .iter()
        .map(|i| i.sub_costs().expect("candidates evaluated before replacement"))
        .collect();
    let argmin = |key: fn(&(f64, f64)) -> f64| {
        (0..pool.len())
            .min_by(|&a, &b| key(&costs[a]).total_cmp(&key(&costs[b])).then(a.cmp(&b)))
            .expect("non-empty pool")
    };
    let first = argmin(|c| c.0);
    let second = argmin(|c| c.1);
    let total = |i: usize| costs[i].0 + costs[i].1;
    let by_total = |a: &usize, b: &usize| -> Ordering { total(*a).total_cmp(&total(*b)).then(a.cmp(b)) };

    let mut keep = Vec::with_capacity(size);
    keep.push(first);
    if second != first {
        keep.push(second);
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(by_total);
    for i in order {
        if keep.len() >= size {
            break;
        }
        if !keep.contains(&i) {
            keep.push(i);
        }
    }
    keep.truncate(size);
    keep.sort_by(by_total);

    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    Population {
        individuals: keep
            .into_iter()
            .map(|i| slots[i].take().expect("distinct indices"))
            .collect(),
    }
}

/// Result of a GA run.
#[derive(Clone, Debug)]
pub struct GaOutcome {
    pub best: Individual,
    pub trace: GaTrace,
    pub population: Population,
}

/// Runs the generation loop until `max_cycles` or the threshold.
pub fn run_ga(cfg: &GaConfig, fitness: &impl Fitness) -> Result<GaOutcome> {
    run_ga_observed(cfg, fitness, |_, _| {})
}

/// As [`run_ga`], calling `observe(cycle, population)` after every cycle.
pub fn run_ga_observed(
    cfg: &GaConfig,
    fitness: &impl Fitness,
    mut observe: impl FnMut(usize, &Population),
) -> Result<GaOutcome> {
    cfg.validate()?;
    let mut rng = SeededRng::new(cfg.seed);
    let mut pop = init_population(cfg, fitness, &mut rng)?;
    let mut trace = GaTrace::default();
    for cycle in 0..cfg.max_cycles {
        let (i, j) = select_parents(&pop, cfg.selection, &mut rng)?;
        let (c1, c2) = crossover(&pop.individuals[i], &pop.individuals[j], cfg.crossover_ratio);
        let mut candidates = Vec::with_capacity(2 + cfg.mutants_per_generation);
        candidates.push(c1.evaluated(fitness));
        candidates.push(c2.evaluated(fitness));
        for k in 0..cfg.mutants_per_generation {
            candidates.push(mutate(&pop.individuals[k], cfg, &mut rng).evaluated(fitness));
        }
        pop = replace_generation(pop, candidates, cfg.population_size);
        trace.best.push(pop.best_fitness());
        trace.mean.push(pop.mean_fitness());
        observe(cycle, &pop);
        if pop.best_fitness() <= cfg.mse_threshold {
            break;
        }
    }
    Ok(GaOutcome {
        best: pop.best().clone(),
        trace,
        population: pop,
    })
}
