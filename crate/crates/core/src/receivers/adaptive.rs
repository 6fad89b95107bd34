//! Stochastic-gradient baselines.

use crate::airlink::SymbolPair;
use crate::error::{check_len, Error, Result};
use crate::numerics::{CVector, C64};

use super::cost::add_sample_gradient;
use super::{FullWeights, WeightPair};

fn check_step(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("step size must be positive and finite"))
    }
}

/// Unconstrained LMS: `w_i ← w_i + μ r conj(e_i)` with `e_i = d_i - w_i^H r`,
/// applied to both filters independently.
pub fn lms_step(w: &mut FullWeights, r: &CVector, desired: SymbolPair, mu: f64) -> Result<()> {
    check_step(mu)?;
    check_len("received vector", w.w1.len(), r.len())?;
    let e1 = desired.first - w.w1.inner(r);
    let e2 = desired.second - w.w2.inner(r);
    w.w1.axpy(e1.conj() * mu, r);
    w.w2.axpy(e2.conj() * mu, r);
    Ok(())
}

/// Relationship-constrained LMS: one stochastic step on the reduced cost,
/// `p ← p - μ_c ∇_{p*} C_N(p; r, d)`.
pub fn fast_lms_step(p: &mut WeightPair, r: &CVector, desired: SymbolPair, mu: f64) -> Result<()> {
    check_step(mu)?;
    check_len("received vector", p.gene_count(), r.len())?;
    let m = p.half();
    let mut ga = CVector::zeros(m);
    let mut gc = CVector::zeros(m);
    add_sample_gradient(p, r, desired, &mut ga, &mut gc);
    let step = C64::new(-mu, 0.0);
    p.wa.axpy(step, &ga);
    p.wc.axpy(step, &gc);
    Ok(())
}
