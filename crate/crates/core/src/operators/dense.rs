use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat, MatRef};

use super::layout::SystemLayout;
use super::linalg::{self, CMat};
use crate::error::{Error, Result};

/// Relative tolerance for the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Square complex matrix on the Hilbert space of a [`SystemLayout`].
#[derive(Clone, Debug)]
pub struct DenseOperator {
    layout: SystemLayout,
    entries: CMat,
    hermitian: bool,
}

impl DenseOperator {
    /// General (not necessarily Hermitian) operator.
    pub fn new(layout: SystemLayout, entries: CMat) -> Result<Self> {
        check_shape(&layout, &entries)?;
        Ok(DenseOperator { layout, entries, hermitian: false })
    }

    /// Operator carrying the Hermitian flag; rejects matrices whose asymmetry
    /// exceeds `1e-12 * max|M_ij|`.
    pub fn hermitian(layout: SystemLayout, entries: CMat) -> Result<Self> {
        check_shape(&layout, &entries)?;
        let asym = linalg::hermitian_asymmetry(entries.as_ref());
        let scale = linalg::max_abs(entries.as_ref());
        if asym > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && asym > 0.0 {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(DenseOperator { layout, entries, hermitian: true })
    }

    /// Hermitian operator from a matrix that is Hermitian up to rounding;
    /// the stored entries are the exact Hermitian part.
    pub(crate) fn hermitian_from(layout: SystemLayout, entries: CMat) -> Self {
        debug_assert_eq!(entries.nrows(), layout.total_dim());
        let entries = linalg::hermitian_part(entries.as_ref());
        DenseOperator { layout, entries, hermitian: true }
    }

    pub(crate) fn general_from(layout: SystemLayout, entries: CMat) -> Self {
        debug_assert_eq!(entries.nrows(), layout.total_dim());
        DenseOperator { layout, entries, hermitian: false }
    }

    pub fn from_fn(layout: SystemLayout, f: impl FnMut(usize, usize) -> c64) -> Self {
        let n = layout.total_dim();
        let entries = Mat::from_fn(n, n, f);
        DenseOperator { layout, entries, hermitian: false }
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        DenseOperator { layout, entries: linalg::identity(n), hermitian: true }
    }

    pub fn zeros(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        DenseOperator { layout, entries: linalg::zeros(n, n), hermitian: true }
    }

    pub fn from_real_diagonal(layout: SystemLayout, diag: &[f64]) -> Result<Self> {
        let n = layout.total_dim();
        if diag.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "diagonal of length {} for dimension {n}",
                diag.len()
            )));
        }
        let entries = Mat::from_fn(n, n, |i, j| if i == j { linalg::re(diag[i]) } else { linalg::re(0.0) });
        Ok(DenseOperator { layout, entries, hermitian: true })
    }

    /// Orthogonal projector `B B^dagger` onto the span of orthonormal columns.
    pub fn projector(layout: SystemLayout, basis: MatRef<'_, c64>) -> Result<Self> {
        if basis.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis has {} rows, layout dimension is {}",
                basis.nrows(),
                layout.total_dim()
            )));
        }
        Ok(Self::hermitian_from(layout, linalg::mul_adj(basis, basis)))
    }

    /// Rank-one `|u><v|`.
    pub fn outer(layout: SystemLayout, u: &[c64], v: &[c64]) -> Result<Self> {
        let n = layout.total_dim();
        if u.len() != n || v.len() != n {
            return Err(Error::DimensionMismatch("outer product vector length".into()));
        }
        let entries = Mat::from_fn(n, n, |i, j| u[i] * v[j].conj());
        Ok(DenseOperator { layout, entries, hermitian: false })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn entries(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }

    /// `max |M_ij - conj(M_ji)|`
    pub fn max_asymmetry(&self) -> f64 {
        linalg::hermitian_asymmetry(self.entries.as_ref())
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(self.entries.as_ref())
    }

    /// Drops the Hermitian flag, or sets it after checking.
    pub fn with_hermitian_flag(self, flag: bool) -> Result<Self> {
        if flag {
            Self::hermitian(self.layout, self.entries)
        } else {
            Ok(DenseOperator { hermitian: false, ..self })
        }
    }

    pub fn hermitian_part(&self) -> Self {
        Self::hermitian_from(self.layout.clone(), self.entries.clone())
    }

    /// Same matrix on a different layout of equal dimension.
    pub fn relayout(&self, layout: SystemLayout) -> Result<Self> {
        check_shape(&layout, &self.entries)?;
        Ok(DenseOperator { layout, entries: self.entries.clone(), hermitian: self.hermitian })
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            layout: self.layout.clone(),
            entries: linalg::adjoint(self.entries.as_ref()),
            hermitian: self.hermitian,
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        DenseOperator {
            layout: self.layout.clone(),
            entries: Mat::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)].conj()),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseOperator {
            layout: self.layout.clone(),
            entries: linalg::scaled(self.entries.as_ref(), linalg::re(s)),
            hermitian: self.hermitian,
        }
    }

    pub fn scale_complex(&self, s: c64) -> Self {
        DenseOperator {
            layout: self.layout.clone(),
            entries: linalg::scaled(self.entries.as_ref(), s),
            hermitian: self.hermitian && s.im == 0.0,
        }
    }

    /// `self + s * 1`
    pub fn shift(&self, s: f64) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..self.dim() {
            entries[(i, i)] += linalg::re(s);
        }
        DenseOperator { layout: self.layout.clone(), entries, hermitian: self.hermitian }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        assert_eq!(v.len(), self.dim(), "vector length");
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<v|M|v>`
    pub fn expectation(&self, v: &[c64]) -> c64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Matrix product `self * other`; the result carries no Hermitian flag.
    pub fn compose(&self, other: &DenseOperator) -> Result<Self> {
        same_dim(self, other)?;
        Ok(DenseOperator::general_from(
            self.layout.clone(),
            linalg::matmul(self.entries.as_ref(), other.entries.as_ref()),
        ))
    }

    /// `A M A^dagger`, Hermitian whenever `M` is.
    pub fn conjugate_by(&self, a: MatRef<'_, c64>, layout: SystemLayout) -> Result<Self> {
        if a.ncols() != self.dim() || a.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch("conjugating matrix shape".into()));
        }
        let am = linalg::matmul(a, self.entries.as_ref());
        let out = linalg::mul_adj(am.as_ref(), a);
        Ok(if self.hermitian {
            Self::hermitian_from(layout, out)
        } else {
            Self::general_from(layout, out)
        })
    }

    /// Little-endian tensor product: `self` on the low sites, `high` above it.
    pub fn kron(&self, high: &DenseOperator) -> Result<Self> {
        let mut dims = self.layout.site_dims().to_vec();
        dims.extend_from_slice(high.layout.site_dims());
        let layout = SystemLayout::with_registers(dims, Vec::new(), self.layout.dim_cap())?;
        let entries = linalg::kron_le(self.entries.as_ref(), high.entries.as_ref());
        Ok(DenseOperator { layout, entries, hermitian: self.hermitian && high.hermitian })
    }

    /// Distance in the operator norm.
    pub fn distance(&self, other: &DenseOperator) -> f64 {
        super::op_norm(&(self - other))
    }
}

fn check_shape(layout: &SystemLayout, entries: &CMat) -> Result<()> {
    let n = layout.total_dim();
    if entries.nrows() != n || entries.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, layout dimension is {n}",
            entries.nrows(),
            entries.ncols()
        )));
    }
    Ok(())
}

fn same_dim(a: &DenseOperator, b: &DenseOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        DenseOperator {
            layout: self.layout.clone(),
            entries: linalg::add(self.entries.as_ref(), rhs.entries.as_ref()),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        DenseOperator {
            layout: self.layout.clone(),
            entries: linalg::sub(self.entries.as_ref(), rhs.entries.as_ref()),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.compose(rhs).expect("operator dimensions differ")
    }
}

/// Operator acting as `local` on `targets` and as the identity elsewhere.
///
/// Local index `a = sum_k a_k * prod_{l<k} d(targets[l])`: the first target is
/// the fastest-varying digit of the local operator.
pub fn tensor_embed(
    local: &DenseOperator,
    targets: &[usize],
    layout: &SystemLayout,
) -> Result<DenseOperator> {
    let entries = embed_matrix(local.entries(), targets, layout)?;
    if local.layout.num_sites() == targets.len() {
        for (k, &s) in targets.iter().enumerate() {
            if local.layout.site_dims()[k] != layout.site_dims()[s] {
                return Err(Error::DimensionMismatch(format!(
                    "local site {k} has dimension {}, target site {s} has {}",
                    local.layout.site_dims()[k],
                    layout.site_dims()[s]
                )));
            }
        }
    }
    Ok(DenseOperator { layout: layout.clone(), entries, hermitian: local.hermitian })
}

pub(crate) fn embed_matrix(
    local: MatRef<'_, c64>,
    targets: &[usize],
    layout: &SystemLayout,
) -> Result<CMat> {
    check_targets(targets, layout)?;
    let local_dim: usize = targets.iter().map(|&s| layout.site_dims()[s]).product();
    if local.nrows() != local_dim || local.ncols() != local_dim {
        return Err(Error::DimensionMismatch(format!(
            "local operator is {}x{}, target sites span dimension {local_dim}",
            local.nrows(),
            local.ncols()
        )));
    }
    let n = layout.total_dim();
    let offsets = layout.local_offsets(targets);
    let bases = layout.complement_bases(targets);
    let mut out = linalg::zeros(n, n);
    for &b in &bases {
        for (ja, &oj) in offsets.iter().enumerate() {
            for (ia, &oi) in offsets.iter().enumerate() {
                let v = local[(ia, ja)];
                if v != linalg::re(0.0) {
                    out[(b + oi, b + oj)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// `(local on targets) * m`, without forming the embedded operator.
pub fn apply_local(
    local: MatRef<'_, c64>,
    targets: &[usize],
    layout: &SystemLayout,
    m: MatRef<'_, c64>,
) -> Result<CMat> {
    check_targets(targets, layout)?;
    let offsets = layout.local_offsets(targets);
    let k = offsets.len();
    if local.nrows() != k || local.ncols() != k || m.nrows() != layout.total_dim() {
        return Err(Error::DimensionMismatch("local action shapes".into()));
    }
    let bases = layout.complement_bases(targets);
    let mut out = linalg::zeros(m.nrows(), m.ncols());
    let mut x = vec![linalg::re(0.0); k];
    for col in 0..m.ncols() {
        for &b in &bases {
            for (a, &o) in offsets.iter().enumerate() {
                x[a] = m[(b + o, col)];
            }
            for (a, &o) in offsets.iter().enumerate() {
                let mut acc = linalg::re(0.0);
                for (a2, xv) in x.iter().enumerate() {
                    acc += local[(a, a2)] * xv;
                }
                out[(b + o, col)] = acc;
            }
        }
    }
    Ok(out)
}

pub(crate) fn check_targets(targets: &[usize], layout: &SystemLayout) -> Result<()> {
    for (k, &s) in targets.iter().enumerate() {
        if s >= layout.num_sites() {
            return Err(Error::DimensionMismatch(format!(
                "target site {s} outside a layout of {} sites",
                layout.num_sites()
            )));
        }
        if targets[..k].contains(&s) {
            return Err(Error::InvalidParameter(format!("target site {s} repeated")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::{c, re};

    fn pauli_x() -> DenseOperator {
        let l = SystemLayout::uniform(1, 2).unwrap();
        DenseOperator::hermitian(l, Mat::from_fn(2, 2, |i, j| re((i != j) as u8 as f64))).unwrap()
    }

    #[test]
    fn x_on_site_zero_is_fastest_digit() {
        let layout = SystemLayout::uniform(2, 2).unwrap();
        let op = tensor_embed(&pauli_x(), &[0], &layout).unwrap();
        // X on site 0 flips the low bit: |00> <-> |01> in index terms 0 <-> 1.
        assert_eq!(op.get(1, 0), re(1.0));
        assert_eq!(op.get(3, 2), re(1.0));
        assert_eq!(op.get(2, 0), re(0.0));
        assert!(op.is_hermitian());
    }

    #[test]
    fn hermitian_check_rejects_asymmetry() {
        let l = SystemLayout::uniform(1, 2).unwrap();
        let m = Mat::from_fn(2, 2, |i, j| if i < j { c(0.0, 1.0) } else { re(0.0) });
        let err = DenseOperator::hermitian(l, m).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { asymmetry } if (asymmetry - 1.0).abs() < 1e-15));
    }

    #[test]
    fn embed_rejects_bad_targets() {
        let layout = SystemLayout::uniform(2, 2).unwrap();
        assert!(tensor_embed(&pauli_x(), &[2], &layout).is_err());
        let l2 = SystemLayout::uniform(2, 2).unwrap();
        let xx = pauli_x().kron(&pauli_x()).unwrap().relayout(l2).unwrap();
        assert!(tensor_embed(&xx, &[1, 1], &layout).is_err());
        let qutrits = SystemLayout::uniform(2, 3).unwrap();
        assert!(tensor_embed(&pauli_x(), &[0], &qutrits).is_err());
    }
}
