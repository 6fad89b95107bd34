//! Linear receivers for the desired user (index 0).
//!
//! Both symbols of an Alamouti block are recovered by filters `w_1`, `w_2` of
//! length `2M`. The MMSE pair obeys `w_b = conj(w_c)`, `w_d = -conj(w_a)`
//! (halves of `w_1 = [w_a; w_b]`, `w_2 = [w_c; w_d]`), so constrained
//! receivers only carry the [`WeightPair`] `(w_a, w_c)`.

mod adaptive;
mod cost;
mod detect;
mod mmse;

pub use adaptive::{fast_lms_step, lms_step};
pub use cost::{
    filter_outputs, reduced_cost, reduced_cost_gradient, reduced_cost_parts, two_filter_cost,
    Fitness, QuadraticCost,
};
pub use detect::detect;
pub use mmse::{
    analytic_autocorrelation, mmse_cost, mmse_weights, sample_autocorrelation,
    verify_block_symmetry, AutocorrMatrix,
};

use alloc::vec::Vec;

use crate::airlink::{Link, SymbolPair};
use crate::error::{check_len, Error, Result};
use crate::numerics::{c, CVector, SeededRng, C64};

/// Reduced unknowns `(w_a, w_c)`, each of length `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPair {
    pub wa: CVector,
    pub wc: CVector,
}

impl WeightPair {
    pub fn new(wa: CVector, wc: CVector) -> Result<Self> {
        check_len("weight pair halves", wa.len(), wc.len())?;
        Ok(WeightPair { wa, wc })
    }

    pub fn zeros(m: usize) -> Self {
        WeightPair {
            wa: CVector::zeros(m),
            wc: CVector::zeros(m),
        }
    }

    /// Half length `M`.
    pub fn half(&self) -> usize {
        self.wa.len()
    }

    /// Number of complex entries, `2M`; entries `0..M` are `w_a`, the rest `w_c`.
    pub fn gene_count(&self) -> usize {
        2 * self.half()
    }

    pub fn gene(&self, i: usize) -> C64 {
        let m = self.half();
        if i < m {
            self.wa[i]
        } else {
            self.wc[i - m]
        }
    }

    pub fn gene_mut(&mut self, i: usize) -> &mut C64 {
        let m = self.half();
        if i < m {
            &mut self.wa[i]
        } else {
            &mut self.wc[i - m]
        }
    }

    /// `w_1 = [w_a; conj(w_c)]`, `w_2 = [w_c; -conj(w_a)]`.
    pub fn expand(&self) -> FullWeights {
        FullWeights {
            w1: CVector::concat(&self.wa, &self.wc.conj()),
            w2: CVector::concat(&self.wc, &self.wa.conj().scaled(c(-1.0, 0.0))),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.wa.is_finite() && self.wc.is_finite()
    }
}

/// Unconstrained filter pair, each of length `2M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullWeights {
    pub w1: CVector,
    pub w2: CVector,
}

impl FullWeights {
    pub fn zeros(m: usize) -> Self {
        FullWeights {
            w1: CVector::zeros(2 * m),
            w2: CVector::zeros(2 * m),
        }
    }

    pub fn half(&self) -> usize {
        self.w1.len() / 2
    }

    /// The partition `(w_a, w_b, w_c, w_d)`.
    pub fn parts(&self) -> [CVector; 4] {
        let m = self.half();
        let (a, b) = self.w1.split(m);
        let (c, d) = self.w2.split(m);
        [a, b, c, d]
    }

    /// Keeps `(w_a, w_c)` and drops the dependent halves.
    pub fn to_pair(&self) -> WeightPair {
        let [a, _, c, _] = self.parts();
        WeightPair { wa: a, wc: c }
    }

    /// `max(‖w_b - conj(w_c)‖∞, ‖w_d + conj(w_a)‖∞)`.
    pub fn relationship_violation(&self) -> f64 {
        let [a, b, c, d] = self.parts();
        let vb = b.max_abs_diff(&c.conj());
        let vd = d.max_abs_diff(&a.conj().scaled(C64::new(-1.0, 0.0)));
        vb.max(vd)
    }

    pub fn max_abs(&self) -> f64 {
        self.w1.max_abs().max(self.w2.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.w2.is_finite()
    }
}

/// A received block with the desired user's known symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingBlock {
    pub received: CVector,
    pub desired: SymbolPair,
}

/// Non-empty set of pilot blocks; sample averages over it stand in for
/// expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingBatch {
    blocks: Vec<TrainingBlock>,
}

impl TrainingBatch {
    pub fn new(blocks: Vec<TrainingBlock>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or(Error::Domain("training batch must not be empty"))?;
        let n = first.received.len();
        if n == 0 || n % 2 != 0 {
            return Err(Error::Domain("received vectors must have even positive length"));
        }
        for b in &blocks {
            check_len("received vector", n, b.received.len())?;
        }
        Ok(TrainingBatch { blocks })
    }

    /// Draws `count` blocks through `link`.
    pub fn from_link(
        link: &Link,
        count: usize,
        noise_variance: f64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let blocks = (0..count)
            .map(|_| {
                link.transmit(noise_variance, rng).map(|t| TrainingBlock {
                    desired: t.desired(),
                    received: t.received,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[TrainingBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Stacked vector length `2M`.
    pub fn dim(&self) -> usize {
        self.blocks[0].received.len()
    }

    /// Same blocks with every received vector and symbol multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let k = C64::new(s, 0.0);
        TrainingBatch {
            blocks: self
                .blocks
                .iter()
                .map(|b| TrainingBlock {
                    received: b.received.scaled(k),
                    desired: SymbolPair::new(b.desired.first * s, b.desired.second * s),
                })
                .collect(),
        }
    }
}
