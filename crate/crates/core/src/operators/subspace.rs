use faer::{c64, Mat, MatRef};

use super::dense::DenseOperator;
use super::layout::SystemLayout;
use super::linalg::{self, CMat};
use crate::error::{Error, Result};

/// Tolerance on `B^dagger B = 1` for user-supplied bases.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Subspace given by orthonormal columns, with its projector.
#[derive(Clone, Debug)]
pub struct Subspace {
    layout: SystemLayout,
    basis: CMat,
    projector: DenseOperator,
}

impl Subspace {
    /// Subspace spanned by orthonormal columns.
    pub fn from_orthonormal(layout: SystemLayout, basis: CMat) -> Result<Self> {
        if basis.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis has {} rows, layout dimension is {}",
                basis.nrows(),
                layout.total_dim()
            )));
        }
        let deviation = linalg::isometry_defect(basis.as_ref());
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self::from_orthonormal_unchecked(layout, basis))
    }

    pub(crate) fn from_orthonormal_unchecked(layout: SystemLayout, basis: CMat) -> Self {
        let projector = DenseOperator::projector(layout.clone(), basis.as_ref())
            .expect("basis rows match the layout");
        Subspace { layout, basis, projector }
    }

    /// Span of arbitrary columns; directions with singular value below
    /// `rtol * s_max` are discarded.
    pub fn span(layout: SystemLayout, columns: MatRef<'_, c64>, rtol: f64) -> Result<Self> {
        if columns.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch("spanning vectors have the wrong length".into()));
        }
        if columns.ncols() == 0 {
            return Ok(Self::zero(layout));
        }
        let svd = columns
            .thin_svd()
            .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))?;
        let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
        let smax = s.first().copied().unwrap_or(0.0);
        let rank = s.iter().filter(|&&x| x > rtol * smax && x > 0.0).count();
        let u = svd.U();
        let basis = Mat::from_fn(columns.nrows(), rank, |i, j| u[(i, j)]);
        Ok(Self::from_orthonormal_unchecked(layout, basis))
    }

    pub fn from_vectors(layout: SystemLayout, vectors: &[Vec<c64>]) -> Result<Self> {
        let n = layout.total_dim();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("spanning vectors have the wrong length".into()));
        }
        let m = linalg::from_columns(n, vectors);
        Self::span(layout, m.as_ref(), 1e-10)
    }

    pub fn whole(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self::from_orthonormal_unchecked(layout, linalg::identity(n))
    }

    pub fn zero(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self::from_orthonormal_unchecked(layout, linalg::zeros(n, 0))
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn basis(&self) -> MatRef<'_, c64> {
        self.basis.as_ref()
    }

    pub fn projector(&self) -> &DenseOperator {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Self {
        let n = self.ambient_dim();
        let k = self.dim();
        if k == 0 {
            return Self::whole(self.layout.clone());
        }
        let rest = linalg::sub(linalg::identity(n).as_ref(), self.projector.entries());
        let (vals, vecs) = linalg::hermitian_eig(rest.as_ref()).expect("projector eigendecomposition");
        let start = vals.partition_point(|&v| v < 0.5);
        let basis = Mat::from_fn(n, n - start, |i, j| vecs[(i, start + j)]);
        let basis = linalg::orthonormal_span(basis.as_ref());
        Self::from_orthonormal_unchecked(self.layout.clone(), basis)
    }

    /// `||(1 - P) v||`
    pub fn residual(&self, v: &[c64]) -> f64 {
        let vm = Mat::from_fn(v.len(), 1, |i, _| v[i]);
        let coeffs = linalg::adj_mul(self.basis.as_ref(), vm.as_ref());
        let proj = linalg::matmul(self.basis.as_ref(), coeffs.as_ref());
        (0..v.len()).map(|i| (v[i] - proj[(i, 0)]).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Component of the columns of `m` orthogonal to this subspace.
    pub(crate) fn reject(&self, m: MatRef<'_, c64>) -> CMat {
        let coeffs = linalg::adj_mul(self.basis.as_ref(), m);
        linalg::sub(m, linalg::matmul(self.basis.as_ref(), coeffs.as_ref()).as_ref())
    }

    /// `|tr P - dim|` and `||P^2 - P||_max`.
    pub fn projector_defects(&self) -> (f64, f64) {
        let p = self.projector.entries();
        let tr = (self.projector.trace().re - self.dim() as f64).abs();
        let p2 = linalg::matmul(p, p);
        (tr, linalg::max_abs(linalg::sub(p2.as_ref(), p).as_ref()))
    }
}

/// `||P1 - P2||`, computed as `max(||(1 - P1) B2||, ||(1 - P2) B1||)`.
///
/// For subspaces of equal dimension this is the sine of the largest
/// principal angle; it is 1 when the dimensions differ.
pub fn subspace_distance(s1: &Subspace, s2: &Subspace) -> f64 {
    assert_eq!(s1.ambient_dim(), s2.ambient_dim(), "subspaces live in different spaces");
    let a = linalg::spectral_norm(s1.reject(s2.basis()).as_ref()).expect("svd");
    let b = linalg::spectral_norm(s2.reject(s1.basis()).as_ref()).expect("svd");
    a.max(b).min(1.0)
}

/// Singular values of `B1^dagger B2`: cosines of the principal angles.
pub fn principal_cosines(s1: &Subspace, s2: &Subspace) -> Vec<f64> {
    let m = linalg::adj_mul(s1.basis(), s2.basis());
    linalg::singular_values(m.as_ref()).expect("svd")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::linalg::re;

    fn qubit() -> SystemLayout {
        SystemLayout::uniform(1, 2).unwrap()
    }

    #[test]
    fn orthogonal_lines_at_distance_one() {
        let a = Subspace::from_vectors(qubit(), &[vec![re(1.0), re(0.0)]]).unwrap();
        let b = Subspace::from_vectors(qubit(), &[vec![re(0.0), re(1.0)]]).unwrap();
        assert!((subspace_distance(&a, &b) - 1.0).abs() < 1e-15);
        assert_eq!(subspace_distance(&a, &a), 0.0);
    }

    #[test]
    fn unequal_dimensions_at_distance_one() {
        let a = Subspace::from_vectors(qubit(), &[vec![re(1.0), re(0.0)]]).unwrap();
        assert!((subspace_distance(&a, &Subspace::whole(qubit())) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn span_drops_dependent_vectors() {
        let l = SystemLayout::new(vec![3]).unwrap();
        let v = vec![re(1.0), re(1.0), re(0.0)];
        let w = vec![re(2.0), re(2.0), re(0.0)];
        let s = Subspace::from_vectors(l, &[v, w]).unwrap();
        assert_eq!(s.dim(), 1);
        let (tr, idem) = s.projector_defects();
        assert!(tr < 1e-12 && idem < 1e-12);
        assert_eq!(s.complement().dim(), 2);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let m = Mat::from_fn(2, 1, |_, _| re(1.0));
        assert!(Subspace::from_orthonormal(qubit(), m).is_err());
    }
}
