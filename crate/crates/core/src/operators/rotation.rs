use faer::{c64, Mat, MatRef};

use super::dense::DenseOperator;
use super::linalg::{self, CMat};
use super::subspace::{subspace_distance, Subspace};
use crate::error::{Error, Result};

/// Distances at or above this make the direct rotation ill-defined.
const MAX_DISTANCE: f64 = 1.0 - 1e-12;

/// Minimal unitary carrying one subspace onto another.
///
/// Stored as `W = 1 + B (w - 1) B^dagger` with `B` an orthonormal basis of a
/// space containing both subspaces, so that `W` can be applied without
/// forming the full matrix.
#[derive(Clone, Debug)]
pub struct DirectRotation {
    basis: CMat,
    core: CMat,
    distance: f64,
}

/// Polar factor of `P_to P_from + (1 - P_to)(1 - P_from)`.
pub fn direct_rotation(from: &Subspace, to: &Subspace) -> Result<DirectRotation> {
    if from.ambient_dim() != to.ambient_dim() || from.dim() != to.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rotation between a {}-dim and a {}-dim subspace (ambient {} and {})",
            from.dim(),
            to.dim(),
            from.ambient_dim(),
            to.ambient_dim()
        )));
    }
    let distance = subspace_distance(from, to);
    if distance >= MAX_DISTANCE {
        return Err(Error::RotationUndefined { distance });
    }
    let n = from.ambient_dim();
    let basis = linalg::orthonormal_span(linalg::hstack(from.basis(), to.basis()).as_ref());
    let r = basis.ncols();
    if r == 0 {
        return Ok(DirectRotation { basis: linalg::zeros(n, 0), core: linalg::zeros(0, 0), distance });
    }
    let bf = linalg::adj_mul(basis.as_ref(), from.basis());
    let bt = linalg::adj_mul(basis.as_ref(), to.basis());
    let pf = linalg::mul_adj(bf.as_ref(), bf.as_ref());
    let pt = linalg::mul_adj(bt.as_ref(), bt.as_ref());
    let id = linalg::identity(r);
    let qf = linalg::sub(id.as_ref(), pf.as_ref());
    let qt = linalg::sub(id.as_ref(), pt.as_ref());
    let m = linalg::add(
        linalg::matmul(pt.as_ref(), pf.as_ref()).as_ref(),
        linalg::matmul(qt.as_ref(), qf.as_ref()).as_ref(),
    );
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("polar decomposition failed: {e:?}")))?;
    let core = linalg::mul_adj(svd.U(), svd.V());
    Ok(DirectRotation { basis, core, distance })
}

impl DirectRotation {
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `||P_from - P_to||` of the defining pair.
    pub fn subspace_distance(&self) -> f64 {
        self.distance
    }

    /// `W x` for the columns of `x`.
    pub fn apply(&self, x: MatRef<'_, c64>) -> CMat {
        if self.basis.ncols() == 0 {
            return x.to_owned();
        }
        let coeffs = linalg::adj_mul(self.basis.as_ref(), x);
        let w1 = linalg::sub_identity(self.core.as_ref());
        let delta = linalg::matmul(w1.as_ref(), coeffs.as_ref());
        linalg::add(x, linalg::matmul(self.basis.as_ref(), delta.as_ref()).as_ref())
    }

    pub fn matrix(&self) -> CMat {
        self.apply(linalg::identity(self.ambient_dim()).as_ref())
    }

    pub fn to_operator(&self, layout: super::layout::SystemLayout) -> Result<DenseOperator> {
        DenseOperator::new(layout, self.matrix())
    }

    /// `||W - 1||`
    pub fn distance_to_identity(&self) -> f64 {
        if self.basis.ncols() == 0 {
            return 0.0;
        }
        linalg::spectral_norm(linalg::sub_identity(self.core.as_ref()).as_ref()).expect("svd")
    }

    /// Anti-Hermitian `S` with `exp(S) = W`, on the principal branch.
    ///
    /// Uses the Cayley transform `K = -i (w - 1)(w + 1)^{-1}`, whose
    /// eigenvalues are `tan(theta / 2)` for the eigenphases `theta` of `w`.
    pub fn generator(&self) -> Result<CMat> {
        let n = self.ambient_dim();
        let r = self.basis.ncols();
        if r == 0 {
            return Ok(linalg::zeros(n, n));
        }
        let w = self.core.as_ref();
        let wm = linalg::sub_identity(w);
        let wp = Mat::from_fn(r, r, |i, j| if i == j { w[(i, j)] + linalg::re(1.0) } else { w[(i, j)] });
        // w is normal, so (w - 1) and (w + 1)^{-1} commute.
        let k = linalg::scaled(linalg::solve(wp.as_ref(), wm.as_ref()).as_ref(), linalg::c(0.0, -1.0));
        let (vals, vecs) = linalg::hermitian_eig(k.as_ref())?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("rotation has an eigenphase at pi".into()));
        }
        let log_w = linalg::spectral_function(&vals, vecs.as_ref(), |t| linalg::c(0.0, 2.0 * t.atan()));
        let bl = linalg::matmul(self.basis.as_ref(), log_w.as_ref());
        Ok(linalg::mul_adj(bl.as_ref(), self.basis.as_ref()))
    }
}
