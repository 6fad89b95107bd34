//! Small dense complex linear algebra and a reproducible random source.
//!
//! Sizes in this crate never exceed a few dozen rows, so everything is plain
//! row-major storage with textbook loops.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

pub type C64 = Complex<f64>;

/// Pivots below this magnitude are reported as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex column vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_vec(v: Vec<C64>) -> Self {
        CVector(v)
    }

    /// Builds a vector from `(re, im)` pairs.
    pub fn from_parts(parts: &[(f64, f64)]) -> Self {
        parts.iter().map(|&(re, im)| c(re, im)).collect()
    }

    /// Unit vector `e_i` of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = c(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, C64> {
        self.0.iter()
    }

    /// Hermitian inner product `self^H other`.
    pub fn inner(&self, other: &CVector) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry magnitude (the infinity norm).
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_i |self_i - other_i|`.
    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> CVector {
        self.0.iter().map(|z| z.conj()).collect()
    }

    pub fn scaled(&self, alpha: C64) -> CVector {
        self.0.iter().map(|z| z * alpha).collect()
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: C64, x: &CVector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
    }

    /// Stacks `top` over `bottom`.
    pub fn concat(top: &CVector, bottom: &CVector) -> CVector {
        let mut v = Vec::with_capacity(top.len() + bottom.len());
        v.extend_from_slice(&top.0);
        v.extend_from_slice(&bottom.0);
        CVector(v)
    }

    /// Copies out `[0, mid)` and `[mid, len)`.
    pub fn split(&self, mid: usize) -> (CVector, CVector) {
        let (a, b) = self.0.split_at(mid);
        (CVector(a.to_vec()), CVector(b.to_vec()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl FromIterator<C64> for CVector {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        CVector(iter.into_iter().collect())
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.add_diagonal(1.0);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(d: &CVector) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        check_len("matrix-vector product", self.cols, v.len())?;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .fold(C64::new(0.0, 0.0), |acc, (a, x)| acc + a * x)
            })
            .collect())
    }

    /// Quadratic form `v^H A v`.
    pub fn quad_form(&self, v: &CVector) -> Result<C64> {
        let av = self.mul_vec(v)?;
        check_len("quadratic form", self.rows, v.len())?;
        Ok(v.inner(&av))
    }

    /// `self += scale * v v^H`.
    pub fn add_outer(&mut self, v: &CVector, scale: f64) -> Result<()> {
        check_len("outer product rows", self.rows, v.len())?;
        check_len("outer product cols", self.cols, v.len())?;
        let n = self.cols;
        for i in 0..self.rows {
            let vi = v[i] * scale;
            for (j, vj) in v.iter().enumerate() {
                self.data[i * n + j] += vi * vj.conj();
            }
        }
        Ok(())
    }

    pub fn add_diagonal(&mut self, d: f64) {
        for i in 0..self.rows.min(self.cols) {
            self.data[i * self.cols + i] += d;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Copy of the `nr × nc` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMatrix {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^H|` over all entries; zero for an exactly Hermitian matrix.
    pub fn hermitian_violation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Returns `acc + v v^H`.
pub fn outer_accumulate(mut acc: CMatrix, v: &CVector) -> Result<CMatrix> {
    acc.add_outer(v, 1.0)?;
    Ok(acc)
}

/// Cholesky factor `A = L L^H` of a Hermitian positive-definite matrix.
///
/// Only the lower triangle of `A` is read.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: CMatrix,
}

impl Cholesky {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        check_len("square matrix", a.rows(), a.cols())?;
        let n = a.rows();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d.is_nan() || d < PIVOT_THRESHOLD {
                return Err(Error::Singular { pivot: d });
            }
            let ljj = libm::sqrt(d);
            l[(j, j)] = c(ljj, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        let n = self.dim();
        check_len("right-hand side", n, b.len())?;
        let l = &self.l;
        // L y = b
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)].re;
        }
        // L^H x = y
        let mut x = y;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[k];
            }
            x[i] = s / l[(i, i)].re;
        }
        Ok(x)
    }
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn hermitian_solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    check_len("square matrix", a.rows(), a.cols())?;
    check_len("right-hand side", a.rows(), b.len())?;
    Cholesky::factor(a)?.solve(b)
}

/// Reproducible pseudo-random source.
///
/// Backed by ChaCha with 8 rounds. A master seed selects the key and a
/// 64-bit stream id selects an independent substream, so trial `i` of a run
/// seeded with `s` always sees `SeededRng::substream(s, i)` regardless of
/// thread scheduling. Uniform doubles take the top 53 bits of a `u64`;
/// Gaussians use the Box–Muller transform with `libm` so the stream is
/// bit-identical across platforms.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `index` under `master`.
    pub fn substream(master: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master);
        inner.set_stream(index);
        SeededRng {
            seed: master,
            inner,
        }
    }

    /// Derives a child generator from the next draw of this one.
    pub fn fork(&mut self, index: u64) -> Self {
        let master = self.inner.next_u64();
        Self::substream(master, index)
    }

    /// A fresh 64-bit seed for a component that owns its own generator.
    pub fn next_seed(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn coin(&mut self) -> bool {
        self.inner.next_u64() >> 63 == 1
    }

    /// Uniform integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.gen_range(lo..hi)
    }

    /// Circular complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_normal(&mut self, variance: f64) -> C64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let theta = core::f64::consts::TAU * u2;
        let s = libm::sqrt(variance / 2.0);
        c(s * radius * libm::cos(theta), s * radius * libm::sin(theta))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> core::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// `n` i.i.d. circular complex Gaussians of total per-entry variance `variance`.
pub fn gaussian_complex(n: usize, variance: f64, rng: &mut SeededRng) -> Result<CVector> {
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::Domain("variance must be non-negative"));
    }
    if n == 0 {
        return Err(Error::Domain("vector length must be positive"));
    }
    Ok((0..n).map(|_| rng.complex_normal(variance)).collect())
}
