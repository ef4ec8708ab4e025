//! Exact Schrieffer-Wolff rotation for `Delta H0 + H1` and its low orders.
//!
//! The generator is the logarithm of the direct rotation taking the
//! perturbed low-energy subspace back onto the unperturbed one, so no series
//! is summed. Only the zeroth and first order terms are produced.

use serde::Serialize;

use crate::config::Constants;
use crate::error::{Error, Result};
use crate::operators::linalg::{self, CMat};
use crate::operators::{direct_rotation, eigh, mat_norm, matrix_rows, op_norm, DenseOperator, Subspace};

/// Tolerance on `||Pi_- H0 Pi_+||`.
pub const OFF_BLOCK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SwProblem {
    h0: DenseOperator,
    h1: DenseOperator,
    delta: f64,
    low: Subspace,
    lambda0: f64,
}

impl SwProblem {
    /// `H~ = delta H0 + H1` split along `low` (`H_-`) and its complement.
    pub fn new(h0: DenseOperator, h1: DenseOperator, delta: f64, low: Subspace) -> Result<Self> {
        if !h0.is_hermitian() {
            return Err(Error::NotHermitian { asymmetry: h0.max_asymmetry() });
        }
        if !h1.is_hermitian() {
            return Err(Error::NotHermitian { asymmetry: h1.max_asymmetry() });
        }
        if h0.dim() != h1.dim() || low.ambient_dim() != h0.dim() {
            return Err(Error::DimensionMismatch("H0, H1 and the low subspace differ in dimension".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
        }
        let b = low.basis();
        let hb = linalg::matmul(h0.entries(), b);
        let off = low.reject(hb.as_ref());
        let off_norm = linalg::spectral_norm(off.as_ref())?;
        if off_norm > OFF_BLOCK_TOL * op_norm(&h0).max(1.0) {
            return Err(Error::Precondition(format!(
                "H0 is not block diagonal (||Pi_- H0 Pi_+|| = {off_norm:e})"
            )));
        }
        let block = linalg::adj_mul(b, hb.as_ref());
        let vals = linalg::hermitian_eigvals(block.as_ref())?;
        let lambda0 = vals.last().copied().unwrap_or(0.0).max(0.0);
        if vals.first().is_some_and(|&v| v < -1e-10) || lambda0 >= 1.0 {
            return Err(Error::Precondition(format!(
                "H0 on the low block has eigenvalues {vals:?}, outside [0, 1)"
            )));
        }
        let h1_norm = op_norm(&h1);
        if h1_norm >= delta / 2.0 {
            return Err(Error::Precondition(format!(
                "||H1|| = {h1_norm} is not below delta / 2 = {}",
                delta / 2.0
            )));
        }
        Ok(SwProblem { h0, h1, delta, low, lambda0 })
    }

    pub fn h0(&self) -> &DenseOperator {
        &self.h0
    }

    pub fn h1(&self) -> &DenseOperator {
        &self.h1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn low(&self) -> &Subspace {
        &self.low
    }

    /// Largest eigenvalue of `H0` on `H_-`.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// `delta H0 + H1`
    pub fn perturbed(&self) -> DenseOperator {
        &self.h0.scale(self.delta) + &self.h1
    }

    fn compress(&self, m: faer::MatRef<'_, faer::c64>) -> CMat {
        let b = self.low.basis();
        linalg::adj_mul(b, linalg::matmul(m, b).as_ref())
    }
}

#[derive(Clone, Debug)]
pub struct SwExpansion {
    /// Anti-Hermitian generator on the full space.
    pub s: CMat,
    /// `Pi_- e^S H~ e^-S Pi_-` in the basis of `H_-`.
    pub h_eff: CMat,
    /// `[delta H0, H1]` compressed to `H_-`.
    pub orders: Vec<CMat>,
    /// `||Pi_- e^S H~ e^-S Pi_+||`
    pub block_residual: f64,
    /// `max(||Pi_- S Pi_-||, ||Pi_+ S Pi_+||)`
    pub diagonal_block_norm: f64,
    pub s_norm: f64,
    /// `||e^S Pi_R e^-S - Pi_-||`
    pub projector_residual: f64,
}

/// Exact rotation and effective Hamiltonian.
pub fn sw_exact(prob: &SwProblem) -> Result<SwExpansion> {
    let ht = prob.perturbed();
    let k = prob.low.dim();
    let e = eigh(&ht)?;
    e.check_cut(k, if k > 0 { e.values()[k - 1] } else { e.min() })?;
    let r = e.lowest(k);
    let w = direct_rotation(&r, &prob.low)?;
    let s = w.generator()?;
    let wh = w.apply(ht.entries());
    let rotated = linalg::adjoint(w.apply(linalg::adjoint(wh.as_ref()).as_ref()).as_ref());
    let rotated = linalg::hermitian_part(rotated.as_ref());
    let h_eff = linalg::hermitian_part(prob.compress(rotated.as_ref()).as_ref());

    let b = prob.low.basis();
    let rb = linalg::matmul(rotated.as_ref(), b);
    let block_residual = linalg::spectral_norm(prob.low.reject(rb.as_ref()).as_ref())?;

    let sb = linalg::matmul(s.as_ref(), b);
    let s_low = linalg::adj_mul(b, sb.as_ref());
    let p_low = prob.low.projector().entries();
    let n = s.nrows();
    let q = linalg::sub(linalg::identity(n).as_ref(), p_low);
    let s_high = linalg::matmul(linalg::matmul(q.as_ref(), s.as_ref()).as_ref(), q.as_ref());
    let diagonal_block_norm =
        linalg::spectral_norm(s_low.as_ref())?.max(linalg::spectral_norm(s_high.as_ref())?);

    let wr = w.apply(r.basis());
    let rotated_r = linalg::mul_adj(wr.as_ref(), wr.as_ref());
    let projector_residual = linalg::spectral_norm(linalg::sub(rotated_r.as_ref(), p_low).as_ref())?;

    Ok(SwExpansion {
        s_norm: linalg::spectral_norm(s.as_ref())?,
        s,
        h_eff,
        orders: sw_series(prob, 1)?,
        block_residual,
        diagonal_block_norm,
        projector_residual,
    })
}

/// `H_eff^(0) = delta H0 Pi_-` and `H_eff^(1) = Pi_- H1 Pi_-`, compressed to
/// `H_-`, up to order `k <= 1`.
pub fn sw_series(prob: &SwProblem, k: usize) -> Result<Vec<CMat>> {
    if k > 1 {
        return Err(Error::InvalidParameter(format!("order {k} > 1 is not available")));
    }
    let mut out = vec![prob.compress(prob.h0.scale(prob.delta).entries())];
    if k == 1 {
        out.push(prob.compress(prob.h1.entries()));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SwBounds {
    pub order: usize,
    pub constant: f64,
    /// `C delta^-1 ||H1|| (1 + lambda0 / (pi delta))`
    pub s_bound: f64,
    pub s_measured: f64,
    /// `C delta^-k ||H1||^(k+1) (1 + lambda0 / (pi delta))`
    pub truncation_bound: f64,
    /// `||H_eff - sum_{j <= k} H_eff^(j)||`
    pub truncation_measured: f64,
    pub s_ok: bool,
    pub truncation_ok: bool,
}

/// Evaluates both bounds next to the measured quantities.
pub fn sw_bounds(prob: &SwProblem, k: usize, constants: &Constants) -> Result<SwBounds> {
    let exp = sw_exact(prob)?;
    sw_bounds_from(prob, &exp, k, constants)
}

pub fn sw_bounds_from(prob: &SwProblem, exp: &SwExpansion, k: usize, constants: &Constants) -> Result<SwBounds> {
    let series = sw_series(prob, k)?;
    let mut partial = linalg::zeros(exp.h_eff.nrows(), exp.h_eff.ncols());
    for term in &series {
        partial = linalg::add(partial.as_ref(), term.as_ref());
    }
    let truncation_measured = mat_norm(linalg::sub(exp.h_eff.as_ref(), partial.as_ref()).as_ref(), true);
    let c = constants.c_sw;
    let d = prob.delta;
    let h1 = op_norm(&prob.h1);
    let factor = 1.0 + prob.lambda0 / (std::f64::consts::PI * d);
    let s_bound = c * h1 / d * factor;
    let truncation_bound = c * d.powi(-(k as i32)) * h1.powi(k as i32 + 1) * factor;
    let slack = 1e-12 * d.max(1.0);
    Ok(SwBounds {
        order: k,
        constant: c,
        s_bound,
        s_measured: exp.s_norm,
        truncation_bound,
        truncation_measured,
        s_ok: exp.s_norm <= s_bound + slack,
        truncation_ok: truncation_measured <= truncation_bound + slack,
    })
}

/// Serializable summary of an expansion.
#[derive(Clone, Debug, Serialize)]
pub struct SwReport {
    pub delta: f64,
    pub lambda0: f64,
    pub h1_norm: f64,
    pub h_eff: Vec<Vec<[f64; 2]>>,
    pub h_eff_spectrum: Vec<f64>,
    pub perturbed_low_spectrum: Vec<f64>,
    pub orders: Vec<Vec<Vec<[f64; 2]>>>,
    pub block_residual: f64,
    pub diagonal_block_norm: f64,
    pub s_norm: f64,
    pub projector_residual: f64,
    pub bounds: SwBounds,
    pub pass: bool,
}

pub fn sw_report(prob: &SwProblem, k: usize, constants: &Constants) -> Result<SwReport> {
    let exp = sw_exact(prob)?;
    let bounds = sw_bounds_from(prob, &exp, k, constants)?;
    let h_eff_spectrum = linalg::hermitian_eigvals(exp.h_eff.as_ref())?;
    let low = eigh(&prob.perturbed())?.values()[..prob.low.dim()].to_vec();
    let scale = op_norm(&prob.perturbed()).max(1.0);
    let spectra_match = h_eff_spectrum.iter().zip(&low).all(|(a, b)| (a - b).abs() <= 1e-9 * scale);
    let pass = bounds.s_ok
        && bounds.truncation_ok
        && spectra_match
        && exp.block_residual <= 1e-9 * scale
        && exp.s_norm < std::f64::consts::FRAC_PI_2;
    Ok(SwReport {
        delta: prob.delta,
        lambda0: prob.lambda0,
        h1_norm: op_norm(&prob.h1),
        h_eff: matrix_rows(exp.h_eff.as_ref()),
        h_eff_spectrum,
        perturbed_low_spectrum: low,
        orders: exp.orders.iter().map(|m| matrix_rows(m.as_ref())).collect(),
        block_residual: exp.block_residual,
        diagonal_block_norm: exp.diagonal_block_norm,
        s_norm: exp.s_norm,
        projector_residual: exp.projector_residual,
        bounds,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SystemLayout;

    fn two_level(v: f64, delta: f64) -> SwProblem {
        let l = SystemLayout::uniform(1, 2).unwrap();
        let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 1.0]).unwrap();
        let h1 = DenseOperator::hermitian(l.clone(), faer::Mat::from_fn(2, 2, |i, j| linalg::re(if i != j { v } else { 0.0 })))
            .unwrap();
        let low = Subspace::from_vectors(l, &[vec![linalg::re(1.0), linalg::re(0.0)]]).unwrap();
        SwProblem::new(h0, h1, delta, low).unwrap()
    }

    #[test]
    fn zero_perturbation_is_trivial() {
        let exp = sw_exact(&two_level(0.0, 10.0)).unwrap();
        assert!(exp.s_norm < 1e-15);
        assert!(exp.h_eff[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn two_level_closed_form() {
        let (v, d) = (0.3, 10.0);
        let exp = sw_exact(&two_level(v, d)).unwrap();
        let expect = (d - (d * d + 4.0 * v * v).sqrt()) / 2.0;
        assert!((exp.h_eff[(0, 0)].re - expect).abs() < 1e-12);
        assert!(exp.block_residual < 1e-12 && exp.diagonal_block_norm < 1e-12);
    }

    #[test]
    fn preconditions() {
        let l = SystemLayout::uniform(1, 2).unwrap();
        let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 1.0]).unwrap();
        let low = Subspace::from_vectors(l.clone(), &[vec![linalg::re(1.0), linalg::re(0.0)]]).unwrap();
        let big = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 6.0]).unwrap();
        assert!(SwProblem::new(h0.clone(), big, 10.0, low.clone()).is_err());
        let x = DenseOperator::hermitian(l.clone(), faer::Mat::from_fn(2, 2, |i, j| linalg::re((i != j) as u8 as f64)))
            .unwrap();
        let zero = DenseOperator::zeros(l);
        assert!(SwProblem::new(x, zero, 10.0, low).is_err());
        assert!(sw_series(&two_level(0.1, 10.0), 2).is_err());
    }
}
