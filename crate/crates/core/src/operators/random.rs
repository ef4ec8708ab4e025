//! Seeded random instances for property tests and sweeps.

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;

use super::dense::DenseOperator;
use super::layout::SystemLayout;
use super::linalg::{self, CMat};
use super::subspace::Subspace;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    linalg::c(re, im)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    Mat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Hermitian matrix `(G + G^dagger) / 2`, rescaled to operator norm `scale`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, layout: SystemLayout, scale: f64) -> DenseOperator {
    let n = layout.total_dim();
    let g = ginibre(rng, n, n);
    let h = linalg::hermitian_part(g.as_ref());
    let norm = super::spectral::mat_norm(h.as_ref(), true);
    let h = linalg::scaled(h.as_ref(), linalg::re(if norm > 0.0 { scale / norm } else { 0.0 }));
    DenseOperator::hermitian_from(layout, h)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { linalg::re(1.0) };
        q[(i, j)] * ph
    })
}

/// `exp(i s K)` for a random Hermitian `K` of unit norm: a unitary within
/// `s` of the identity.
pub fn near_identity_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, s: f64) -> CMat {
    if n < 2 {
        return linalg::identity(n);
    }
    let layout = SystemLayout::with_registers(vec![n], Vec::new(), usize::MAX)
        .expect("single site layout");
    let k = hermitian(rng, layout, 1.0);
    super::spectral::expm_i(&k, s).expect("hermitian").into_entries()
}

/// Normalized random vector.
pub fn state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<c64> {
    let v: Vec<c64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Uniformly random `k`-dimensional subspace.
pub fn subspace<R: Rng + ?Sized>(rng: &mut R, layout: SystemLayout, k: usize) -> Subspace {
    let n = layout.total_dim();
    let g = ginibre(rng, n, k);
    let q = linalg::orthonormal_span(g.as_ref());
    let q = Mat::from_fn(n, k, |i, j| q[(i, j)]);
    Subspace::from_orthonormal_unchecked(layout, q)
}

/// Density operator `sum_i p_i |v_i><v_i|` of rank `rank` supported on the
/// columns of `support`.
pub fn density_on<R: Rng + ?Sized>(rng: &mut R, support: faer::MatRef<'_, c64>, rank: usize) -> CMat {
    let k = support.ncols();
    let g = ginibre(rng, k, rank.max(1));
    let rho_small = linalg::mul_adj(g.as_ref(), g.as_ref());
    let tr: f64 = (0..k).map(|i| rho_small[(i, i)].re).sum();
    let rho_small = linalg::scaled(rho_small.as_ref(), linalg::re(1.0 / tr));
    let sr = linalg::matmul(support, rho_small.as_ref());
    linalg::hermitian_part(linalg::mul_adj(sr.as_ref(), support).as_ref())
}
