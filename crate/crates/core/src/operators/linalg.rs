//! Thin wrappers over the dense kernels used throughout the crate.

use faer::linalg::solvers::Solve;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors, SelfAdjointEvdParams};
use faer::diag::Diag;
use faer::{c64, Auto, Mat, MatRef, Par, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

#[inline]
pub fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { re(1.0) } else { re(0.0) })
}

pub fn adjoint(a: MatRef<'_, c64>) -> CMat {
    a.adjoint().to_owned()
}

pub fn matmul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    a * b
}

/// `a^dagger b`
pub fn adj_mul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a.adjoint() * b
}

/// `a b^dagger`
pub fn mul_adj(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a * b.adjoint()
}

pub fn scaled(a: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

pub fn sub(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

pub fn sub_identity(a: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        if i == j {
            a[(i, j)] - re(1.0)
        } else {
            a[(i, j)]
        }
    })
}

/// Largest absolute entry.
pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// `max |a_ij - conj(a_ji)|`
pub fn hermitian_asymmetry(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in j..n {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn hermitian_part(a: MatRef<'_, c64>) -> CMat {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// `max |(a^dagger a - 1)_ij|`
pub fn isometry_defect(a: MatRef<'_, c64>) -> f64 {
    max_abs(sub_identity(adj_mul(a, a).as_ref()).as_ref())
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eig(a: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let h = hermitian_part(a);
    let fast = self_adjoint_evd(h.as_ref(), 128)?;
    if n < 128 || evd_residual_ok(h.as_ref(), &fast) {
        return Ok(fast);
    }
    // Divide and conquer can lose accuracy on badly graded matrices such as
    // the penalty Hamiltonians built here; the QR sweep does not.
    self_adjoint_evd(h.as_ref(), usize::MAX)
}

fn self_adjoint_evd(h: MatRef<'_, c64>, recursion_threshold: usize) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    let mut params = <SelfAdjointEvdParams as Auto<c64>>::auto();
    params.recursion_threshold = recursion_threshold;
    let mut s = Diag::<c64>::zeros(n);
    let mut u = zeros(n, n);
    let par = Par::Seq;
    let req = evd::self_adjoint_evd_scratch::<c64>(n, ComputeEigenvectors::Yes, par, params.into());
    evd::self_adjoint_evd(h, s.as_mut(), Some(u.as_mut()), par, MemStack::new(&mut MemBuffer::new(req)), params.into())
        .map_err(|e| Error::Numerical(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    Ok((s.column_vector().iter().map(|x| x.re).collect(), u))
}

/// `max_j ||H u_j - lambda_j u_j||` within a backward-stable margin.
fn evd_residual_ok(h: MatRef<'_, c64>, (values, u): &(Vec<f64>, CMat)) -> bool {
    let n = h.nrows();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let hu = matmul(h, u.as_ref());
    let worst = (0..n)
        .map(|j| (0..n).map(|i| (hu[(i, j)] - u[(i, j)] * values[j]).norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    worst <= 64.0 * n as f64 * f64::EPSILON * scale
}

pub fn hermitian_eigvals(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let h = hermitian_part(a);
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigenvalues failed: {e:?}")))
}

/// Singular values in non-increasing order.
pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))
}

pub fn spectral_norm(a: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Orthonormal columns spanning (at least) the column space of `a`.
///
/// Uses the thin Householder `Q`, which is orthonormal even when `a` is
/// rank deficient; the extra directions are harmless for every caller.
pub fn orthonormal_span(a: MatRef<'_, c64>) -> CMat {
    let (n, k) = (a.nrows(), a.ncols());
    if k == 0 {
        return zeros(n, 0);
    }
    if k >= n {
        return identity(n);
    }
    a.qr().compute_thin_Q()
}

pub fn solve(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a.partial_piv_lu().solve(b)
}

pub fn hstack(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let ka = a.ncols();
    Mat::from_fn(a.nrows(), ka + b.ncols(), |i, j| if j < ka { a[(i, j)] } else { b[(i, j - ka)] })
}

/// `V diag(f(lambda)) V^dagger`
pub fn spectral_function(values: &[f64], vectors: MatRef<'_, c64>, f: impl Fn(f64) -> c64) -> CMat {
    let n = vectors.nrows();
    let k = values.len();
    let scaled = Mat::from_fn(n, k, |i, j| vectors[(i, j)] * f(values[j]));
    mul_adj(scaled.as_ref(), vectors)
}

pub fn inner(a: MatRef<'_, c64>, col_a: usize, b: MatRef<'_, c64>, col_b: usize) -> c64 {
    let mut s = re(0.0);
    for i in 0..a.nrows() {
        s += a[(i, col_a)].conj() * b[(i, col_b)];
    }
    s
}

pub fn column(a: MatRef<'_, c64>, j: usize) -> Vec<c64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn from_columns(n: usize, cols: &[Vec<c64>]) -> CMat {
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Kronecker product in the little-endian convention: `low` is the
/// fast-varying factor, so the result acts on index `i_low + dim(low) * i_high`.
pub fn kron_le(low: MatRef<'_, c64>, high: MatRef<'_, c64>) -> CMat {
    let (lr, lc) = (low.nrows(), low.ncols());
    Mat::from_fn(lr * high.nrows(), lc * high.ncols(), |i, j| {
        high[(i / lr, j / lc)] * low[(i % lr, j % lc)]
    })
}
