use crate::airlink::SignatureSet;
use crate::error::{check_len, Error, Result};
use crate::numerics::{CMatrix, CVector, Cholesky};

use super::FullWeights;

/// Autocorrelation `R_y = E[r r^H]` of the stacked received vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AutocorrMatrix {
    r: CMatrix,
}

impl AutocorrMatrix {
    pub fn new(r: CMatrix) -> Result<Self> {
        check_len("square autocorrelation", r.rows(), r.cols())?;
        if r.rows() == 0 || !r.rows().is_multiple_of(2) {
            return Err(Error::Domain("autocorrelation size must be even and positive"));
        }
        Ok(AutocorrMatrix { r })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    /// Block size `M`.
    pub fn half(&self) -> usize {
        self.r.rows() / 2
    }

    /// `[R_a, R_b, R_c, R_d]`, the `M × M` quadrants in row-major order.
    pub fn blocks(&self) -> [CMatrix; 4] {
        let m = self.half();
        [
            self.r.block(0, 0, m, m),
            self.r.block(0, m, m, m),
            self.r.block(m, 0, m, m),
            self.r.block(m, m, m, m),
        ]
    }
}

/// `R_y = Σ_u (f_{u,1} f_{u,1}^H + f_{u,2} f_{u,2}^H) + σ_v² I` for
/// uncorrelated unit-power symbols.
pub fn analytic_autocorrelation(signatures: &SignatureSet, noise_variance: f64) -> Result<AutocorrMatrix> {
    if noise_variance.is_nan() || noise_variance < 0.0 {
        return Err(Error::Domain("noise variance must be non-negative"));
    }
    let n = signatures.dim();
    let mut r = CMatrix::zeros(n, n);
    for sig in signatures.users() {
        r.add_outer(&sig.f[0], 1.0)?;
        r.add_outer(&sig.f[1], 1.0)?;
    }
    r.add_diagonal(noise_variance);
    AutocorrMatrix::new(r)
}

/// `(1/N) Σ r r^H` over the given received vectors.
pub fn sample_autocorrelation<'a>(received: impl IntoIterator<Item = &'a CVector>) -> Result<AutocorrMatrix> {
    let mut iter = received.into_iter().peekable();
    let n = iter
        .peek()
        .map(|r| r.len())
        .ok_or(Error::Domain("no samples"))?;
    let mut acc = CMatrix::zeros(n, n);
    let mut count = 0usize;
    for r in iter {
        acc.add_outer(r, 1.0)?;
        count += 1;
    }
    acc.scale(1.0 / count as f64);
    AutocorrMatrix::new(acc)
}

/// `max(‖R_d - conj(R_a)‖∞, ‖R_c + conj(R_b)‖∞)`, entrywise maxima.
pub fn verify_block_symmetry(r: &AutocorrMatrix) -> f64 {
    let [ra, rb, rc, rd] = r.blocks();
    let mut neg_rb = rb.conj();
    neg_rb.scale(-1.0);
    rd.max_abs_diff(&ra.conj()).max(rc.max_abs_diff(&neg_rb))
}

/// `w_{o,i} = R_y⁻¹ f_{1,i}`.
pub fn mmse_weights(r: &AutocorrMatrix, f11: &CVector, f12: &CVector) -> Result<FullWeights> {
    let chol = Cholesky::factor(r.matrix())?;
    Ok(FullWeights {
        w1: chol.solve(f11)?,
        w2: chol.solve(f12)?,
    })
}

/// Minimum two-filter cost `(1 - f_{1,1}^H R⁻¹ f_{1,1}) + (1 - f_{1,2}^H R⁻¹ f_{1,2})`.
pub fn mmse_cost(r: &AutocorrMatrix, f11: &CVector, f12: &CVector) -> Result<f64> {
    let w = mmse_weights(r, f11, f12)?;
    let q1 = f11.inner(&w.w1);
    let q2 = f12.inner(&w.w2);
    // both quadratic forms are real for Hermitian R; the imaginary parts are rounding residue
    debug_assert!(q1.im.abs() <= 1e-10 * (1.0 + q1.re.abs()));
    debug_assert!(q2.im.abs() <= 1e-10 * (1.0 + q2.re.abs()));
    Ok((1.0 - q1.re) + (1.0 - q2.re))
}
