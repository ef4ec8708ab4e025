use faer::Mat;
use serde::{Deserialize, Serialize};

use super::Encoding;
use crate::error::{Error, Result};
use crate::operators::linalg::{self, CMat};
use crate::operators::{direct_rotation, eigh, eigvalsh, op_norm, subspace_distance, DenseOperator, DirectRotation, Subspace};

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SimulationTargets {
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    /// 1-based index into the spectrum of `H`.
    pub i: usize,
    pub target: f64,
    /// 1-based index into the spectrum of `H'`.
    pub j: usize,
    pub simulator: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub delta: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub targets: SimulationTargets,
    pub target_dim: usize,
    pub encoded_dim: usize,
    pub low_energy_dim: usize,
    /// `lambda_{k+1}(H') - lambda_k(H')` across the cut, if both exist.
    pub gap_at_delta: Option<f64>,
    /// Distance between `W range(E(1))` and `S_{<=Delta}(H')`.
    pub support_residual: f64,
    pub eigen_table: Vec<EigenRow>,
    pub max_eigen_difference: f64,
    /// `S_E~ = S_{<=Delta}(H')` and `||V~ - V|| <= eta_target`.
    pub condition_i: bool,
    /// `||H'_{<=Delta} - E~(H)|| <= epsilon_target`.
    pub condition_ii: bool,
    /// Every table difference is at most `epsilon + 1e-9`.
    pub eigen_transfer: bool,
    pub pass: bool,
    #[serde(skip)]
    pub w_rotation: DirectRotation,
    #[serde(skip)]
    pub v_tilde: CMat,
}

/// Certificate with no targets; conditions then only check consistency.
pub fn verify_simulation(
    h: &DenseOperator,
    hp: &DenseOperator,
    enc: &Encoding,
    delta: f64,
) -> Result<SimulationReport> {
    verify_simulation_with(h, hp, enc, delta, SimulationTargets::default())
}

/// Builds `V~ = W V` with `W` the direct rotation from `range(E(1))` to
/// `S_{<=Delta}(H')` and measures `eta = ||V~ - V||` and
/// `epsilon = ||H' Pi_{<=Delta} - V~ (H (x) P + conj(H) (x) Q) V~^dagger||`.
pub fn verify_simulation_with(
    h: &DenseOperator,
    hp: &DenseOperator,
    enc: &Encoding,
    delta: f64,
    targets: SimulationTargets,
) -> Result<SimulationReport> {
    for op in [h, hp] {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian { asymmetry: op.max_asymmetry() });
        }
    }
    if h.dim() != enc.target_dim() || hp.dim() != enc.layout().total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "encoding maps dimension {} into {}, operators have {} and {}",
            enc.target_dim(),
            enc.layout().total_dim(),
            h.dim(),
            hp.dim()
        )));
    }
    let e = eigh(hp)?;
    let k = e.count_below(delta)?;
    if k != enc.encoded_dim() {
        return Err(Error::DimensionMismatch(format!(
            "H' has {k} eigenvalues at or below {delta}, the encoded subspace has dimension {}",
            enc.encoded_dim()
        )));
    }
    let low = e.lowest(k);
    let support = Subspace::from_orthonormal(hp.layout().clone(), enc.support_basis()?)?;
    let w = direct_rotation(&support, &low)?;
    let v_tilde = w.apply(enc.v());
    let eta = linalg::spectral_norm(linalg::sub(v_tilde.as_ref(), enc.v()).as_ref())?;
    let rotated_support = Subspace::from_orthonormal_unchecked(hp.layout().clone(), w.apply(support.basis()));
    let support_residual = subspace_distance(&rotated_support, &low);

    // Both operators live on S_{<=Delta}; compress onto a basis containing it
    // and the range of V~.
    let basis = linalg::orthonormal_span(linalg::hstack(low.basis(), v_tilde.as_ref()).as_ref());
    let bu = linalg::adj_mul(basis.as_ref(), low.basis());
    let lam = &e.values()[..k];
    let bu_l = Mat::from_fn(bu.nrows(), k, |i, j| bu[(i, j)] * lam[j]);
    let h_low = linalg::mul_adj(bu_l.as_ref(), bu.as_ref());
    let bv = linalg::adj_mul(basis.as_ref(), v_tilde.as_ref());
    let x = enc.ancilla_operator(h.entries());
    let enc_h = linalg::mul_adj(linalg::matmul(bv.as_ref(), x.as_ref()).as_ref(), bv.as_ref());
    let diff = linalg::hermitian_part(linalg::sub(h_low.as_ref(), enc_h.as_ref()).as_ref());
    let epsilon = linalg::hermitian_eigvals(diff.as_ref())?.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let hv = eigvalsh(h)?;
    let per = enc.rank_p() + enc.rank_q();
    let mut eigen_table = Vec::with_capacity(k);
    for (i, &t) in hv.iter().enumerate() {
        for j in i * per..(i + 1) * per {
            let s = e.values()[j];
            eigen_table.push(EigenRow { i: i + 1, target: t, j: j + 1, simulator: s, difference: (t - s).abs() });
        }
    }
    let max_eigen_difference = eigen_table.iter().fold(0.0f64, |m, r| m.max(r.difference));
    let gap_at_delta = (k > 0 && k < e.dim()).then(|| e.values()[k] - e.values()[k - 1]);

    let slack = 1e-12 * op_norm(h).max(1.0);
    let condition_i = support_residual <= 1e-8 && targets.eta.is_none_or(|t| eta <= t + 1e-12);
    let condition_ii = targets.epsilon.is_none_or(|t| epsilon <= t + slack);
    let eigen_transfer = max_eigen_difference <= epsilon + 1e-9;
    Ok(SimulationReport {
        delta,
        eta,
        epsilon,
        targets,
        target_dim: h.dim(),
        encoded_dim: enc.encoded_dim(),
        low_energy_dim: k,
        gap_at_delta,
        support_residual,
        eigen_table,
        max_eigen_difference,
        condition_i,
        condition_ii,
        eigen_transfer,
        pass: condition_i && condition_ii && eigen_transfer,
        w_rotation: w,
        v_tilde,
    })
}

/// `E_AC = E_BC o E_AB`; the outer encoding must have `Q = 0`.
pub fn compose_encodings(ab: &Encoding, bc: &Encoding) -> Result<Encoding> {
    if bc.conjugation_split() {
        return Err(Error::Precondition("outer encoding has a conjugated branch".into()));
    }
    if ab.layout().total_dim() != bc.target_dim() {
        return Err(Error::DimensionMismatch(format!(
            "inner encoding lands in dimension {}, outer expects {}",
            ab.layout().total_dim(),
            bc.target_dim()
        )));
    }
    let lift = linalg::kron_le(ab.v(), linalg::identity(bc.ancilla_dim()).as_ref());
    let v = linalg::matmul(bc.v(), lift.as_ref());
    let p = linalg::kron_le(ab.p(), bc.p());
    let q = linalg::kron_le(ab.q(), bc.p());
    Encoding::new(bc.layout().clone(), ab.target_dim(), v, p, q)
}

/// Certifies the composite encoding of two simulations directly.
pub fn compose_simulations(
    h_a: &DenseOperator,
    h_c: &DenseOperator,
    ab: &Encoding,
    bc: &Encoding,
    delta: f64,
    targets: SimulationTargets,
) -> Result<SimulationReport> {
    let ac = compose_encodings(ab, bc)?;
    verify_simulation_with(h_a, h_c, &ac, delta, targets)
}
