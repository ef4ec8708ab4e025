use std::ops::Range;

use faer::{c64, Mat, MatRef};

use super::dense::DenseOperator;
use super::layout::SystemLayout;
use super::linalg::{self, CMat};
use super::subspace::Subspace;
use crate::error::{Error, Result};

/// Magnitude above which a component fixes the phase of an eigenvector.
pub const PHASE_TOL: f64 = 1e-8;

/// Relative tolerance under which neighbouring eigenvalues form one cluster.
pub const CLUSTER_RTOL: f64 = 1e-9;

/// Ascending eigenvalues and phase-fixed orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: CMat,
    layout: SystemLayout,
    norm: f64,
}

/// Decomposition of a Hermitian operator.
///
/// Every eigenvector is rotated so that its first component of magnitude
/// above `1e-8` is real and positive. Within a degeneracy cluster, vectors are
/// ordered by the index of that component.
pub fn eigh(op: &DenseOperator) -> Result<EigenSystem> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian { asymmetry: op.max_asymmetry() });
    }
    let (values, mut vectors) = linalg::hermitian_eig(op.entries())?;
    let n = values.len();
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lead = vec![0usize; n];
    for j in 0..n {
        let i0 = (0..n).find(|&i| vectors[(i, j)].norm() > PHASE_TOL).unwrap_or(0);
        lead[j] = i0;
        let z = vectors[(i0, j)];
        let phase = z.conj() / z.norm();
        for i in 0..n {
            vectors[(i, j)] *= phase;
        }
        vectors[(i0, j)] = linalg::re(vectors[(i0, j)].norm());
    }
    let tol = CLUSTER_RTOL * norm.max(1.0);
    let mut order: Vec<usize> = (0..n).collect();
    for r in cluster_ranges(&values, tol) {
        order[r.clone()].sort_by_key(|&j| (lead[j], j));
    }
    let values = order.iter().map(|&j| values[j]).collect();
    let vectors = Mat::from_fn(n, n, |i, k| vectors[(i, order[k])]);
    Ok(EigenSystem { values, vectors, layout: op.layout().clone(), norm })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(op: &DenseOperator) -> Result<Vec<f64>> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian { asymmetry: op.max_asymmetry() });
    }
    linalg::hermitian_eigvals(op.entries())
}

/// Largest singular value.
pub fn op_norm(op: &DenseOperator) -> f64 {
    mat_norm(op.entries(), op.is_hermitian())
}

pub(crate) fn mat_norm(m: MatRef<'_, c64>, hermitian: bool) -> f64 {
    if hermitian {
        if let Ok(v) = linalg::hermitian_eigvals(m) {
            return v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        }
    }
    linalg::spectral_norm(m).expect("singular value decomposition did not converge")
}

/// `exp(i t H)` through the eigendecomposition of `H`.
pub fn expm_i(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { asymmetry: h.max_asymmetry() });
    }
    let (values, vectors) = linalg::hermitian_eig(h.entries())?;
    let u = linalg::spectral_function(&values, vectors.as_ref(), |x| {
        let (s, c) = (x * t).sin_cos();
        linalg::c(c, s)
    });
    Ok(DenseOperator::general_from(h.layout().clone(), u))
}

fn cluster_ranges(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] >= tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    pub fn vector(&self, i: usize) -> Vec<c64> {
        linalg::column(self.vectors.as_ref(), i)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max |lambda|` of the decomposed operator.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `1e-9 * max(1, ||H||)`
    pub fn cluster_tol(&self) -> f64 {
        CLUSTER_RTOL * self.norm.max(1.0)
    }

    /// Index ranges of degeneracy clusters, ascending.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        cluster_ranges(&self.values, self.cluster_tol())
    }

    /// Number of eigenvalues `<= threshold`, refusing cuts inside a cluster.
    pub fn count_below(&self, threshold: f64) -> Result<usize> {
        let k = self.values.partition_point(|&v| v <= threshold);
        self.check_cut(k, threshold)?;
        Ok(k)
    }

    pub(crate) fn check_cut(&self, k: usize, threshold: f64) -> Result<()> {
        if k > 0 && k < self.values.len() {
            let gap = self.values[k] - self.values[k - 1];
            if gap < self.cluster_tol() {
                return Err(Error::ThresholdInCluster { threshold, gap, tol: self.cluster_tol() });
            }
        }
        Ok(())
    }

    /// Span of the eigenvectors with eigenvalue `<= threshold`.
    pub fn subspace_below(&self, threshold: f64) -> Result<Subspace> {
        let k = self.count_below(threshold)?;
        Ok(self.lowest(k))
    }

    /// Span of the `k` lowest eigenvectors (no cluster check).
    pub fn lowest(&self, k: usize) -> Subspace {
        self.span_of(0..k)
    }

    pub fn span_of(&self, range: Range<usize>) -> Subspace {
        let n = self.dim();
        let basis = Mat::from_fn(n, range.len(), |i, j| self.vectors[(i, range.start + j)]);
        Subspace::from_orthonormal_unchecked(self.layout.clone(), basis)
    }

    /// `lambda_{k+1} - lambda_k` with `k` eigenvalues `<= threshold`.
    pub fn gap_above(&self, threshold: f64) -> Result<f64> {
        let k = self.count_below(threshold)?;
        if k == 0 || k == self.values.len() {
            return Err(Error::NoGap(format!(
                "{k} of {} eigenvalues lie at or below {threshold}",
                self.values.len()
            )));
        }
        Ok(self.values[k] - self.values[k - 1])
    }

    /// `sum_i f(lambda_i) |v_i><v_i|`
    pub fn function(&self, f: impl Fn(f64) -> c64) -> CMat {
        linalg::spectral_function(&self.values, self.vectors.as_ref(), f)
    }

    pub fn reconstruct(&self) -> DenseOperator {
        DenseOperator::hermitian_from(self.layout.clone(), self.function(linalg::re))
    }

    /// `max_i ||H v_i - lambda_i v_i||`
    pub fn max_residual(&self, op: &DenseOperator) -> f64 {
        let hv = linalg::matmul(op.entries(), self.vectors.as_ref());
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            let r: f64 = (0..self.dim())
                .map(|i| (hv[(i, j)] - self.vectors[(i, j)] * self.values[j]).norm_sqr())
                .sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }
}
