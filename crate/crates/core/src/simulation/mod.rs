//! Encodings `E(M) = V (M (x) P + conj(M) (x) Q) V^dagger` and certificates
//! that one Hamiltonian approximately simulates another.

mod certify;
pub mod instances;
mod physics;

pub use certify::{
    compose_encodings, compose_simulations, verify_simulation, verify_simulation_with, EigenRow,
    SimulationReport, SimulationTargets,
};
pub use physics::{check_dynamics, check_partition_function, DynamicsCheck, PartitionCheck};

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::linalg::{self, CMat};
use crate::operators::{apply_local, DenseOperator, Subspace, SystemLayout};

/// Tolerance on `V^dagger V = 1` and on the projector identities.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Residual below which an encoding counts as local.
pub const LOCALITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Encoding {
    layout: SystemLayout,
    target_dim: usize,
    v: CMat,
    p: CMat,
    q: CMat,
    rank_p: usize,
    rank_q: usize,
}

fn projector_rank(m: &CMat, name: &str) -> Result<usize> {
    let sq = linalg::matmul(m.as_ref(), m.as_ref());
    let defect = linalg::max_abs(linalg::sub(sq.as_ref(), m.as_ref()).as_ref())
        .max(linalg::hermitian_asymmetry(m.as_ref()));
    if defect > ISOMETRY_TOL {
        return Err(Error::Precondition(format!("{name} is not an orthogonal projector (defect {defect:e})")));
    }
    let tr: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    Ok(tr.round() as usize)
}

impl Encoding {
    /// `v` maps `C^target_dim (x) C^r` (target index fastest) into the
    /// simulator space; `p` and `q` are `r x r`.
    pub fn new(layout: SystemLayout, target_dim: usize, v: CMat, p: CMat, q: CMat) -> Result<Self> {
        let r = p.nrows();
        if p.ncols() != r || q.nrows() != r || q.ncols() != r {
            return Err(Error::DimensionMismatch("P and Q must be square of equal size".into()));
        }
        if v.nrows() != layout.total_dim() || v.ncols() != target_dim * r {
            return Err(Error::DimensionMismatch(format!(
                "V is {}x{}, expected {}x{}",
                v.nrows(),
                v.ncols(),
                layout.total_dim(),
                target_dim * r
            )));
        }
        let defect = linalg::isometry_defect(v.as_ref());
        if defect > ISOMETRY_TOL {
            return Err(Error::NotOrthonormal { deviation: defect });
        }
        let rank_p = projector_rank(&p, "P")?;
        let rank_q = projector_rank(&q, "Q")?;
        let pq = linalg::max_abs(linalg::matmul(p.as_ref(), q.as_ref()).as_ref());
        if pq > ISOMETRY_TOL {
            return Err(Error::Precondition(format!("PQ != 0 (max entry {pq:e})")));
        }
        Ok(Encoding { layout, target_dim, v, p, q, rank_p, rank_q })
    }

    /// Plain isometric encoding `M -> V M V^dagger`.
    pub fn isometry(layout: SystemLayout, target_dim: usize, v: CMat) -> Result<Self> {
        Self::new(layout, target_dim, v, linalg::identity(1), linalg::zeros(1, 1))
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self::isometry(layout, n, linalg::identity(n)).expect("identity is an isometry")
    }

    /// Same `P`, `Q` and layout with another isometry.
    pub fn with_isometry(&self, v: CMat) -> Result<Self> {
        Self::new(self.layout.clone(), self.target_dim, v, self.p.clone(), self.q.clone())
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn v(&self) -> faer::MatRef<'_, faer::c64> {
        self.v.as_ref()
    }

    pub fn p(&self) -> faer::MatRef<'_, faer::c64> {
        self.p.as_ref()
    }

    pub fn q(&self) -> faer::MatRef<'_, faer::c64> {
        self.q.as_ref()
    }

    pub fn rank_p(&self) -> usize {
        self.rank_p
    }

    pub fn rank_q(&self) -> usize {
        self.rank_q
    }

    pub fn ancilla_dim(&self) -> usize {
        self.p.nrows()
    }

    /// Whether the `conj(M) (x) Q` branch is present.
    pub fn conjugation_split(&self) -> bool {
        self.rank_q > 0
    }

    /// `(p + q) dim(H)`, the rank of `E(1)`.
    pub fn encoded_dim(&self) -> usize {
        (self.rank_p + self.rank_q) * self.target_dim
    }

    /// `M (x) P + conj(M) (x) Q` on the domain of `V`.
    pub fn ancilla_operator(&self, m: faer::MatRef<'_, faer::c64>) -> CMat {
        let mp = linalg::kron_le(m, self.p.as_ref());
        if self.rank_q == 0 {
            return mp;
        }
        let conj = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj());
        linalg::add(mp.as_ref(), linalg::kron_le(conj.as_ref(), self.q.as_ref()).as_ref())
    }

    /// `E(M)` as a matrix.
    pub fn map_matrix(&self, m: faer::MatRef<'_, faer::c64>) -> CMat {
        let x = self.ancilla_operator(m);
        let vx = linalg::matmul(self.v.as_ref(), x.as_ref());
        linalg::mul_adj(vx.as_ref(), self.v.as_ref())
    }

    /// Orthonormal basis of `range(E(1)) = V (C^d (x) range(P + Q))`.
    pub fn support_basis(&self) -> Result<CMat> {
        let pq = linalg::add(self.p.as_ref(), self.q.as_ref());
        let (vals, vecs) = linalg::hermitian_eig(pq.as_ref())?;
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
        let b = Mat::from_fn(vecs.nrows(), keep.len(), |i, j| vecs[(i, keep[j])]);
        let lift = linalg::kron_le(linalg::identity(self.target_dim).as_ref(), b.as_ref());
        Ok(linalg::matmul(self.v.as_ref(), lift.as_ref()))
    }

    pub fn support(&self) -> Result<Subspace> {
        Subspace::from_orthonormal(self.layout.clone(), self.support_basis()?)
    }
}

/// `E(M)`; Hermitian input gives Hermitian output.
pub fn apply_encoding(enc: &Encoding, m: &DenseOperator) -> Result<DenseOperator> {
    if m.dim() != enc.target_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} for an encoding of a {}-dim system",
            m.dim(),
            enc.target_dim
        )));
    }
    let out = enc.map_matrix(m.entries());
    if m.is_hermitian() {
        Ok(DenseOperator::hermitian_from(enc.layout.clone(), out))
    } else {
        Ok(DenseOperator::general_from(enc.layout.clone(), out))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SiteResidual {
    pub site: usize,
    pub simulator_sites: Vec<usize>,
    /// Largest `||E(A (x) 1) - (A' (x) 1) E(1)||` over matrix units `A`.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    pub sites: Vec<SiteResidual>,
    pub max_residual: f64,
    pub local: bool,
}

fn frobenius_inner(a: &CMat, b: &CMat) -> faer::c64 {
    let mut acc = linalg::re(0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

/// Fits `A'` on the simulator sites `site_map[j]` for every matrix unit on
/// target site `j`, by least squares over the range of `E(1)`.
pub fn check_local_encoding(
    enc: &Encoding,
    target: &SystemLayout,
    site_map: &[Vec<usize>],
) -> Result<LocalityReport> {
    if target.total_dim() != enc.target_dim || site_map.len() != target.num_sites() {
        return Err(Error::DimensionMismatch("target layout does not match the encoding".into()));
    }
    let sim = &enc.layout;
    let e1 = enc.map_matrix(linalg::identity(enc.target_dim).as_ref());
    let mut sites = Vec::with_capacity(site_map.len());
    for (j, sim_sites) in site_map.iter().enumerate() {
        let m: usize = sim_sites.iter().map(|&s| sim.site_dims().get(s).copied().unwrap_or(0)).product();
        let mut design = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let unit = Mat::from_fn(m, m, |x, y| linalg::re(((x, y) == (a, b)) as u8 as f64));
                design.push(apply_local(unit.as_ref(), sim_sites, sim, e1.as_ref())?);
            }
        }
        let nd = design.len();
        let gram = Mat::from_fn(nd, nd, |x, y| frobenius_inner(&design[x], &design[y]));
        let (gv, gu) = linalg::hermitian_eig(gram.as_ref())?;
        let cut = 1e-12 * gv.last().copied().unwrap_or(0.0).max(1e-300);
        let d = target.site_dims()[j];
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let unit = Mat::from_fn(d, d, |x, y| linalg::re(((x, y) == (a, b)) as u8 as f64));
                let local = crate::operators::embed_matrix(unit.as_ref(), &[j], target)?;
                let y = enc.map_matrix(local.as_ref());
                let rhs: Vec<_> = design.iter().map(|dm| frobenius_inner(dm, &y)).collect();
                // pseudo-inverse solve of the normal equations
                let mut coef = vec![linalg::re(0.0); nd];
                for (k, &lam) in gv.iter().enumerate() {
                    if lam <= cut {
                        continue;
                    }
                    let mut proj = linalg::re(0.0);
                    for (x, r) in rhs.iter().enumerate() {
                        proj += gu[(x, k)].conj() * r;
                    }
                    for (x, cx) in coef.iter_mut().enumerate() {
                        *cx += gu[(x, k)] * proj / lam;
                    }
                }
                let mut fit = y.clone();
                for (dm, &cx) in design.iter().zip(&coef) {
                    fit = linalg::sub(fit.as_ref(), linalg::scaled(dm.as_ref(), cx).as_ref());
                }
                worst = worst.max(linalg::spectral_norm(fit.as_ref())?);
            }
        }
        sites.push(SiteResidual { site: j, simulator_sites: sim_sites.clone(), residual: worst });
    }
    let max_residual = sites.iter().fold(0.0f64, |m, s| m.max(s.residual));
    Ok(LocalityReport { sites, max_residual, local: max_residual <= LOCALITY_TOL })
}
