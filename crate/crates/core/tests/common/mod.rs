#![allow(dead_code)]

use graphcov::graph::SpectralBasis;
use graphcov::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-like random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column signs so the distribution does not depend on QR conventions.
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_basis(n: usize, rng: &mut ChaCha8Rng) -> SpectralBasis {
    let u = random_orthogonal(n, rng).map(|v| C64::new(v, 0.0));
    SpectralBasis::new(u, DVector::from_fn(n, |i, _| i as f64)).unwrap()
}

pub fn random_nonneg(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(0.1..2.0))
}

/// `U diag(p) Uᴴ`.
pub fn spectral_covariance(basis: &SpectralBasis, p: &DVector<f64>) -> DMatrix<C64> {
    let u = basis.eigvecs();
    let d = DMatrix::from_diagonal(&p.map(|v| C64::new(v, 0.0)));
    let r = u * d * u.adjoint();
    (&r + r.adjoint()) * C64::new(0.5, 0.0)
}

pub fn cvec(v: &DVector<f64>) -> DVector<C64> {
    v.map(|x| C64::new(x, 0.0))
}

/// Random subset of `0..n` with `k` elements.
pub fn random_subset(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}
