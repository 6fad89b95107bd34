//! Mean-square cost of the two-filter receiver, in full and reduced form.

use crate::airlink::SymbolPair;
use crate::error::{check_len, Result};
use crate::numerics::{CMatrix, CVector, C64};

use super::{AutocorrMatrix, FullWeights, TrainingBatch, WeightPair};

/// `(w_1^H r, w_2^H r)`.
pub fn filter_outputs(w: &FullWeights, r: &CVector) -> (C64, C64) {
    (w.w1.inner(r), w.w2.inner(r))
}

/// Sample MSE of each filter of an unconstrained pair.
pub fn two_filter_cost(w: &FullWeights, batch: &TrainingBatch) -> Result<(f64, f64)> {
    check_len("filter length", batch.dim(), w.w1.len())?;
    check_len("filter length", batch.dim(), w.w2.len())?;
    let (mut c1, mut c2) = (0.0, 0.0);
    for b in batch.blocks() {
        let (y1, y2) = filter_outputs(w, &b.received);
        c1 += (y1 - b.desired.first).norm_sqr();
        c2 += (y2 - b.desired.second).norm_sqr();
    }
    let n = batch.len() as f64;
    Ok((c1 / n, c2 / n))
}

fn transpose_dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
}

fn hermitian_dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter()
        .zip(y)
        .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

/// Outputs written directly in `(w_a, w_c)`:
/// `y_1 = w_a^H r_t + w_c^T r_b`, `y_2 = w_c^H r_t - w_a^T r_b`,
/// where `r_t`, `r_b` are the first- and (conjugated) second-interval halves.
fn reduced_outputs(p: &WeightPair, r: &CVector) -> (C64, C64) {
    let (top, bottom) = r.as_slice().split_at(p.half());
    let (wa, wc) = (p.wa.as_slice(), p.wc.as_slice());
    (
        hermitian_dot(wa, top) + transpose_dot(wc, bottom),
        hermitian_dot(wc, top) - transpose_dot(wa, bottom),
    )
}

/// Sample averages of the two reduced sub-costs `(C_N1, C_N2)`.
pub fn reduced_cost_parts(p: &WeightPair, batch: &TrainingBatch) -> Result<(f64, f64)> {
    check_len("weight pair", batch.dim(), p.gene_count())?;
    let (mut c1, mut c2) = (0.0, 0.0);
    for b in batch.blocks() {
        let (y1, y2) = reduced_outputs(p, &b.received);
        c1 += (y1 - b.desired.first).norm_sqr();
        c2 += (y2 - b.desired.second).norm_sqr();
    }
    let n = batch.len() as f64;
    Ok((c1 / n, c2 / n))
}

/// Reduced cost `C_N = C_N1 + C_N2`.
pub fn reduced_cost(p: &WeightPair, batch: &TrainingBatch) -> Result<f64> {
    reduced_cost_parts(p, batch).map(|(a, b)| a + b)
}

/// Conjugate Wirtinger gradient `(∂C_N/∂w_a*, ∂C_N/∂w_c*)` of the sample cost.
///
/// With errors `e_i = y_i - b_i`:
/// `g_a = mean(r_t conj(e_1) - conj(r_b) e_2)`,
/// `g_c = mean(r_t conj(e_2) + conj(r_b) e_1)`.
pub fn reduced_cost_gradient(p: &WeightPair, batch: &TrainingBatch) -> Result<(CVector, CVector)> {
    check_len("weight pair", batch.dim(), p.gene_count())?;
    let m = p.half();
    let mut ga = CVector::zeros(m);
    let mut gc = CVector::zeros(m);
    for b in batch.blocks() {
        add_sample_gradient(p, &b.received, b.desired, &mut ga, &mut gc);
    }
    let inv = C64::new(1.0 / batch.len() as f64, 0.0);
    Ok((ga.scaled(inv), gc.scaled(inv)))
}

/// Adds the single-block gradient of `|y_1 - b_1|² + |y_2 - b_2|²` into `(ga, gc)`.
pub(crate) fn add_sample_gradient(
    p: &WeightPair,
    r: &CVector,
    desired: SymbolPair,
    ga: &mut CVector,
    gc: &mut CVector,
) {
    let m = p.half();
    let (y1, y2) = reduced_outputs(p, r);
    let e1 = y1 - desired.first;
    let e2 = y2 - desired.second;
    let (top, bottom) = r.as_slice().split_at(m);
    for k in 0..m {
        let rb = bottom[k].conj();
        ga[k] += top[k] * e1.conj() - rb * e2;
        gc[k] += top[k] * e2.conj() + rb * e1;
    }
}

/// Anything that scores a weight pair by its two sub-costs `(C_N1, C_N2)`.
pub trait Fitness {
    /// Half length `M` of the pairs this fitness accepts.
    fn half(&self) -> usize;

    fn costs(&self, p: &WeightPair) -> (f64, f64);

    fn total(&self, p: &WeightPair) -> f64 {
        let (a, b) = self.costs(p);
        a + b
    }
}

impl Fitness for TrainingBatch {
    fn half(&self) -> usize {
        self.dim() / 2
    }

    fn costs(&self, p: &WeightPair) -> (f64, f64) {
        reduced_cost_parts(p, self).expect("weight pair sized for this batch")
    }
}

/// The two filter costs as explicit quadratics,
/// `C_i(w) = w^H R w - 2 Re(w^H p_i) + e_i`.
///
/// Built either from the exact model (`R = R_y`, `p_i = f_{1,i}`, `e_i = 1`)
/// or from the second moments of a training batch, in which case it equals
/// the batch's sample cost up to rounding while costing `O(M²)` per
/// evaluation regardless of batch size.
#[derive(Clone, Debug)]
pub struct QuadraticCost {
    r: CMatrix,
    cross: [CVector; 2],
    energy: [f64; 2],
}

impl QuadraticCost {
    pub fn analytic(r: &AutocorrMatrix, f11: &CVector, f12: &CVector) -> Result<Self> {
        check_len("signature", r.dim(), f11.len())?;
        check_len("signature", r.dim(), f12.len())?;
        Ok(QuadraticCost {
            r: r.matrix().clone(),
            cross: [f11.clone(), f12.clone()],
            energy: [1.0, 1.0],
        })
    }

    pub fn from_batch(batch: &TrainingBatch) -> Self {
        let n = batch.dim();
        let mut r = CMatrix::zeros(n, n);
        let mut p1 = CVector::zeros(n);
        let mut p2 = CVector::zeros(n);
        let mut e = [0.0, 0.0];
        for b in batch.blocks() {
            r.add_outer(&b.received, 1.0).expect("uniform batch");
            p1.axpy(b.desired.first.conj(), &b.received);
            p2.axpy(b.desired.second.conj(), &b.received);
            e[0] += b.desired.first.norm_sqr();
            e[1] += b.desired.second.norm_sqr();
        }
        let inv = 1.0 / batch.len() as f64;
        r.scale(inv);
        let k = C64::new(inv, 0.0);
        QuadraticCost {
            r,
            cross: [p1.scaled(k), p2.scaled(k)],
            energy: [e[0] * inv, e[1] * inv],
        }
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    fn filter_cost(&self, w: &CVector, i: usize) -> f64 {
        let rw = self.r.mul_vec(w).expect("filter sized for this cost");
        w.inner(&rw).re - 2.0 * w.inner(&self.cross[i]).re + self.energy[i]
    }

    /// Costs of an unconstrained filter pair.
    pub fn full_costs(&self, w: &FullWeights) -> (f64, f64) {
        (self.filter_cost(&w.w1, 0), self.filter_cost(&w.w2, 1))
    }

    /// Conjugate Wirtinger gradient with respect to `(w_a, w_c)`.
    ///
    /// With `g_i = R w_i - p_i` split into halves `(g_i^t, g_i^b)`:
    /// `∂/∂w_a* = g_1^t - conj(g_2^b)` and `∂/∂w_c* = conj(g_1^b) + g_2^t`.
    pub fn gradient(&self, p: &WeightPair) -> (CVector, CVector) {
        let w = p.expand();
        let m = p.half();
        let mut g1 = self.r.mul_vec(&w.w1).expect("pair sized for this cost");
        g1.axpy(C64::new(-1.0, 0.0), &self.cross[0]);
        let mut g2 = self.r.mul_vec(&w.w2).expect("pair sized for this cost");
        g2.axpy(C64::new(-1.0, 0.0), &self.cross[1]);
        let ga = (0..m).map(|k| g1[k] - g2[m + k].conj()).collect();
        let gc = (0..m).map(|k| g1[m + k].conj() + g2[k]).collect();
        (ga, gc)
    }
}

impl Fitness for QuadraticCost {
    fn half(&self) -> usize {
        self.dim() / 2
    }

    fn costs(&self, p: &WeightPair) -> (f64, f64) {
        self.full_costs(&p.expand())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{ChipScale, Link, SystemConfig};
    use crate::numerics::{c, gaussian_complex, SeededRng};
    use crate::receivers::{analytic_autocorrelation, mmse_cost, mmse_weights, TrainingBlock};
    use alloc::vec;
    use alloc::vec::Vec;

    fn setup(m: usize, u: usize, sigma2: f64, seed: u64) -> Link {
        let cfg = SystemConfig {
            subcarriers: m,
            users: u,
            paths: m.min(3),
            noise_variance: sigma2,
            chip_scale: ChipScale::UnitNormCode,
            master_seed: seed,
        };
        Link::generate(&cfg, &mut SeededRng::new(seed)).unwrap()
    }

    fn random_pair(m: usize, rng: &mut SeededRng) -> WeightPair {
        WeightPair::new(
            gaussian_complex(m, 1.0, rng).unwrap(),
            gaussian_complex(m, 1.0, rng).unwrap(),
        )
        .unwrap()
    }

    /// Central differences on the real and imaginary coordinates, combined
    /// as `(∂/∂x + j ∂/∂y) / 2`.
    fn finite_difference(p: &WeightPair, f: impl Fn(&WeightPair) -> f64, h: f64) -> Vec<C64> {
        (0..p.gene_count())
            .map(|i| {
                let mut d = [0.0; 2];
                for (k, dir) in [c(h, 0.0), c(0.0, h)].into_iter().enumerate() {
                    let mut plus = p.clone();
                    *plus.gene_mut(i) += dir;
                    let mut minus = p.clone();
                    *minus.gene_mut(i) -= dir;
                    d[k] = (f(&plus) - f(&minus)) / (2.0 * h);
                }
                c(d[0] / 2.0, d[1] / 2.0)
            })
            .collect()
    }

    #[test]
    fn zero_weights_cost_two() {
        let l = setup(4, 2, 0.1, 1);
        let batch = TrainingBatch::from_link(&l, 50, 0.1, &mut SeededRng::new(2)).unwrap();
        let cost = reduced_cost(&WeightPair::zeros(4), &batch).unwrap();
        assert!((cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_single_sample() {
        // M = 1: r = (r_t, r_b), y1 = conj(wa) r_t + wc r_b, y2 = conj(wc) r_t - wa r_b
        let r = CVector::from_parts(&[(1.0, 2.0), (-0.5, 1.0)]);
        let b = SymbolPair::new(c(1.0, 0.0), c(0.0, -1.0));
        let batch = TrainingBatch::new(vec![TrainingBlock { received: r, desired: b }]).unwrap();
        let p = WeightPair::new(CVector::from_parts(&[(0.5, 0.5)]), CVector::from_parts(&[(1.0, -1.0)])).unwrap();
        // y1 = (0.5-0.5j)(1+2j) + (1-j)(-0.5+j) = (1.5+0.5j) + (0.5+1.5j) = 2+2j
        // y2 = (1+j)(1+2j) - (0.5+0.5j)(-0.5+j) = (-1+3j) - (-0.75+0.25j) = -0.25+2.75j
        // |y1-b1|² = |1+2j|² = 5 ; |y2-b2|² = |-0.25+3.75j|² = 14.125
        let (c1, c2) = reduced_cost_parts(&p, &batch).unwrap();
        assert!((c1 - 5.0).abs() < 1e-12);
        assert!((c2 - 14.125).abs() < 1e-12);
    }

    #[test]
    fn reduced_equals_expanded_two_filter_cost() {
        let l = setup(8, 3, 0.05, 3);
        let mut rng = SeededRng::new(4);
        let batch = TrainingBatch::from_link(&l, 64, 0.05, &mut rng).unwrap();
        for _ in 0..20 {
            let p = random_pair(8, &mut rng);
            let (a, b) = reduced_cost_parts(&p, &batch).unwrap();
            let (x, y) = two_filter_cost(&p.expand(), &batch).unwrap();
            assert!((a - x).abs() <= 1e-12 * (1.0 + x));
            assert!((b - y).abs() <= 1e-12 * (1.0 + y));
            let q = QuadraticCost::from_batch(&batch);
            let (qa, qb) = q.costs(&p);
            assert!((qa - a).abs() <= 1e-10 * (1.0 + a));
            assert!((qb - b).abs() <= 1e-10 * (1.0 + b));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let l = setup(4, 1, 0.1, 5);
        let batch = TrainingBatch::from_link(&l, 4, 0.1, &mut SeededRng::new(5)).unwrap();
        assert!(reduced_cost(&WeightPair::zeros(2), &batch).is_err());
        assert!(reduced_cost_gradient(&WeightPair::zeros(2), &batch).is_err());
    }

    #[test]
    fn sample_gradient_matches_finite_differences() {
        let l = setup(2, 2, 0.1, 6);
        let mut rng = SeededRng::new(7);
        let batch = TrainingBatch::from_link(&l, 8, 0.1, &mut rng).unwrap();
        for _ in 0..20 {
            let p = random_pair(2, &mut rng);
            let (ga, gc) = reduced_cost_gradient(&p, &batch).unwrap();
            let fd = finite_difference(&p, |q| reduced_cost(q, &batch).unwrap(), 1e-5);
            let analytic: Vec<C64> = ga.iter().chain(gc.iter()).copied().collect();
            let scale = analytic.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, f) in analytic.iter().zip(&fd) {
                assert!((a - f).norm() <= 1e-5 * scale, "{a} vs {f}");
            }
        }
    }

    #[test]
    fn quadratic_gradient_matches_sample_gradient() {
        let l = setup(4, 2, 0.1, 8);
        let mut rng = SeededRng::new(9);
        let batch = TrainingBatch::from_link(&l, 32, 0.1, &mut rng).unwrap();
        let q = QuadraticCost::from_batch(&batch);
        let p = random_pair(4, &mut rng);
        let (ga, gc) = reduced_cost_gradient(&p, &batch).unwrap();
        let (qa, qc) = q.gradient(&p);
        assert!(ga.max_abs_diff(&qa) <= 1e-10 * (1.0 + ga.max_abs()));
        assert!(gc.max_abs_diff(&qc) <= 1e-10 * (1.0 + gc.max_abs()));
    }

    #[test]
    fn gradient_is_homogeneous_of_degree_two() {
        let l = setup(4, 2, 0.1, 10);
        let mut rng = SeededRng::new(11);
        let batch = TrainingBatch::from_link(&l, 16, 0.1, &mut rng).unwrap();
        let p = random_pair(4, &mut rng);
        let (ga, gc) = reduced_cost_gradient(&p, &batch).unwrap();
        let (sa, sc) = reduced_cost_gradient(&p, &batch.scaled(2.0)).unwrap();
        let four = c(4.0, 0.0);
        assert!(sa.max_abs_diff(&ga.scaled(four)) <= 1e-12 * (1.0 + sa.max_abs()));
        assert!(sc.max_abs_diff(&gc.scaled(four)) <= 1e-12 * (1.0 + sc.max_abs()));
    }

    #[test]
    fn analytic_cost_is_stationary_at_mmse() {
        for (m, u, seed) in [(2, 1, 12), (8, 3, 13), (32, 20, 14)] {
            let l = setup(m, u, 0.1, seed);
            let r = analytic_autocorrelation(l.signatures(), 0.1).unwrap();
            let s = l.signatures().user(0);
            let q = QuadraticCost::analytic(&r, &s.f[0], &s.f[1]).unwrap();
            let pair = mmse_weights(&r, &s.f[0], &s.f[1]).unwrap().to_pair();
            let (ga, gc) = q.gradient(&pair);
            assert!(libm::sqrt(ga.norm_sqr() + gc.norm_sqr()) <= 1e-8);
            let cmin = mmse_cost(&r, &s.f[0], &s.f[1]).unwrap();
            assert!((q.total(&pair) - cmin).abs() <= 1e-8);
        }
    }
}
