use serde::Serialize;

use super::{apply_encoding, Encoding, SimulationReport};
use crate::error::{Error, Result};
use crate::operators::linalg::{self, c};
use crate::operators::{eigh, eigvalsh, op_norm, DenseOperator};

#[derive(Clone, Debug, Serialize)]
pub struct PartitionCheck {
    pub beta: f64,
    pub log_z_target: f64,
    pub log_z_simulator: f64,
    /// `|Z_H' - (p+q) Z_H| / ((p+q) Z_H)`
    pub relative_error: f64,
    pub bound: f64,
    pub holds: bool,
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Relative error of the simulator's partition function against
/// `dim(H') e^{-beta Delta} / ((p+q) dim(H) e^{-beta ||H||}) + e^{epsilon beta} - 1`.
pub fn check_partition_function(
    h: &DenseOperator,
    hp: &DenseOperator,
    enc: &Encoding,
    report: &SimulationReport,
    beta: f64,
) -> Result<PartitionCheck> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be non-negative")));
    }
    let per = (enc.rank_p() + enc.rank_q()) as f64;
    let log_z_target = log_sum_exp(eigvalsh(h)?.into_iter().map(|l| -beta * l));
    let log_z_simulator = log_sum_exp(eigvalsh(hp)?.into_iter().map(|l| -beta * l));
    let relative_error = (log_z_simulator - per.ln() - log_z_target).exp_m1().abs();
    let first = ((hp.dim() as f64).ln() - beta * report.delta - per.ln() - (h.dim() as f64).ln()
        + beta * op_norm(h))
    .exp();
    let bound = first + (report.epsilon * beta).exp_m1();
    Ok(PartitionCheck {
        beta,
        log_z_target,
        log_z_simulator,
        relative_error,
        bound,
        holds: relative_error <= bound + 1e-9,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsCheck {
    pub t: f64,
    /// `||e^{-iH't} rho e^{iH't} - e^{-iE(H)t} rho e^{iE(H)t}||_1`
    pub trace_distance: f64,
    /// `2 epsilon t + 4 eta`
    pub bound: f64,
    pub holds: bool,
}

fn evolve(h: &DenseOperator, rho: &DenseOperator, t: f64) -> Result<linalg::CMat> {
    let u = eigh(h)?.function(|l| c((l * t).cos(), -(l * t).sin()));
    let ur = linalg::matmul(u.as_ref(), rho.entries());
    Ok(linalg::mul_adj(ur.as_ref(), u.as_ref()))
}

/// Trace distance between the evolutions of an encoded state under `H'`
/// and under `E(H)`.
pub fn check_dynamics(
    h: &DenseOperator,
    hp: &DenseOperator,
    enc: &Encoding,
    rho: &DenseOperator,
    t: f64,
    epsilon: f64,
    eta: f64,
) -> Result<DynamicsCheck> {
    if rho.dim() != hp.dim() {
        return Err(Error::DimensionMismatch(format!("state of dimension {} for H' of {}", rho.dim(), hp.dim())));
    }
    let e1 = enc.map_matrix(linalg::identity(enc.target_dim()).as_ref());
    let leak = linalg::max_abs(linalg::sub(linalg::matmul(e1.as_ref(), rho.entries()).as_ref(), rho.entries()).as_ref());
    if leak > 1e-9 {
        return Err(Error::Precondition(format!("state is not supported in the encoded subspace (residual {leak:e})")));
    }
    let eh = apply_encoding(enc, h)?;
    let a = evolve(hp, rho, t)?;
    let b = evolve(&eh, rho, t)?;
    let diff = linalg::hermitian_part(linalg::sub(a.as_ref(), b.as_ref()).as_ref());
    let trace_distance: f64 = linalg::hermitian_eigvals(diff.as_ref())?.iter().map(|v| v.abs()).sum();
    let bound = 2.0 * epsilon * t.abs() + 4.0 * eta;
    Ok(DynamicsCheck { t, trace_distance, bound, holds: trace_distance <= bound + 1e-9 })
}
