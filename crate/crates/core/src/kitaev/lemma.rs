use faer::Mat;
use serde::Serialize;

use super::{build_kitaev, history_isometry, history_isometry_over, kappa_limit, KitaevHamiltonian};
use crate::circuits::{acceptance_gap, acceptance_operator, idle_prefix, AcceptanceOperator, VerifierCircuit};
use crate::config::Constants;
use crate::error::{Error, Result};
use crate::operators::linalg::{self, CMat};
use crate::operators::{eigh, matrix_rows, subspace_distance, Subspace};

/// `g / (4 T^3 (T+1))`: half the largest `kappa` the lemma hypothesis allows.
pub fn default_kappa(g: f64, steps: usize) -> f64 {
    let t = steps as f64;
    g / (4.0 * t.powi(3) * (t + 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct HmkRow {
    /// Eigenvalue of the acceptance operator (descending order).
    pub q_eigenvalue: f64,
    /// Matched eigenvalue of `H_MK` (ascending order).
    pub hmk_eigenvalue: f64,
    /// `kappa (1 - lambda) / (T + 1)`
    pub predicted: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HmkLemmaReport {
    pub steps: usize,
    pub kappa: f64,
    pub completeness: f64,
    pub acceptance_gap: Option<f64>,
    /// `2 T^3 (T+1) kappa`, which the acceptance gap must exceed.
    pub hypothesis_threshold: f64,
    pub rows: Vec<HmkRow>,
    pub max_deviation: f64,
    /// `C_dev T^3 kappa^2`
    pub deviation_bound: f64,
    pub deviation_ok: bool,
    /// Energy cut defining the low-energy subspace `S_0`.
    pub s0_threshold: f64,
    pub s0_dim: usize,
    pub c0_dim: usize,
    pub projector_distance: f64,
    /// `C_proj T^3 kappa`
    pub projector_bound: f64,
    pub projector_ok: bool,
    pub gap_above_s0: Option<f64>,
    pub gap_lower_bound: Option<f64>,
    pub gap_ok: bool,
    /// `||Pi_R - Pi_G||` with `R` the lowest witness-dimension eigenvectors of
    /// `H_MK` and `G` the span of all history states.
    pub sin_theta_distance: f64,
    /// `T^3 kappa`
    pub sin_theta_bound: f64,
    pub sin_theta_ok: bool,
    pub pass: bool,
}

fn accepting_vectors(aq: &AcceptanceOperator, c: f64) -> CMat {
    let e = &aq.eigen;
    let tol = e.cluster_tol();
    let first = e.values().partition_point(|&v| v < c - tol);
    let n = e.dim();
    Mat::from_fn(n, n - first, |i, j| e.vectors()[(i, first + j)])
}

fn check_hypothesis(gap: Option<f64>, steps: usize, kappa: f64) -> Result<f64> {
    let t = steps as f64;
    let threshold = 2.0 * t.powi(3) * (t + 1.0) * kappa;
    if let Some(g) = gap {
        if g <= threshold {
            return Err(Error::Precondition(format!(
                "acceptance gap {g} does not exceed 2 T^3 (T+1) kappa = {threshold}"
            )));
        }
    }
    Ok(threshold)
}

/// Compares the low spectrum of `H_MK` with `kappa (1 - lambda_i) / (T+1)`
/// and its low-energy subspace with the accepting history states.
pub fn check_hmk_lemma(kh: &KitaevHamiltonian, constants: &Constants) -> Result<HmkLemmaReport> {
    let circuit = &kh.circuit;
    let c = circuit.completeness();
    let (t, kappa) = (kh.steps as f64, kh.kappa);
    let aq = acceptance_operator(circuit)?;
    let gap = acceptance_gap(&aq, c).gap;
    let hypothesis_threshold = check_hypothesis(gap, kh.steps, kappa)?;

    let e = eigh(&kh.h_mk())?;
    let dw = aq.eigen.dim();
    let rows: Vec<HmkRow> = aq
        .eigen
        .values()
        .iter()
        .rev()
        .zip(e.values())
        .map(|(&lambda, &mk)| {
            let predicted = kappa * (1.0 - lambda) / (t + 1.0);
            HmkRow { q_eigenvalue: lambda, hmk_eigenvalue: mk, predicted, deviation: (mk - predicted).abs() }
        })
        .collect();
    let max_deviation = rows.iter().fold(0.0f64, |m, r| m.max(r.deviation));
    let deviation_bound = constants.c_dev * t.powi(3) * kappa * kappa;

    let g_eff = gap.unwrap_or(c);
    let s0_threshold = kappa * (1.0 - c + g_eff / 2.0) / (t + 1.0);
    let s0 = e.subspace_below(s0_threshold)?;
    let hist = history_isometry(circuit, kh.rep)?;
    let acc = accepting_vectors(&aq, c);
    let c0 = Subspace::span(kh.layout().clone(), linalg::matmul(hist.as_ref(), acc.as_ref()).as_ref(), 1e-10)?;
    let projector_distance = subspace_distance(&s0, &c0);
    let projector_bound = constants.c_proj * t.powi(3) * kappa;

    let k = s0.dim();
    let gap_above_s0 = (k > 0 && k < e.dim()).then(|| e.values()[k] - e.values()[k - 1]);
    let gap_lower_bound = gap.map(|g| kappa * g / (t + 1.0) - 2.0 * deviation_bound);
    let gap_ok = match (gap_above_s0, gap_lower_bound) {
        (Some(m), Some(b)) => m >= b,
        _ => true,
    };

    let g_space = Subspace::from_orthonormal(kh.layout().clone(), hist)?;
    let r_space = e.lowest(dw);
    let sin_theta_distance = subspace_distance(&r_space, &g_space);
    let sin_theta_bound = t.powi(3) * kappa;

    let deviation_ok = max_deviation <= deviation_bound;
    let projector_ok = projector_distance <= projector_bound;
    Ok(HmkLemmaReport {
        steps: kh.steps,
        kappa,
        completeness: c,
        acceptance_gap: gap,
        hypothesis_threshold,
        rows,
        max_deviation,
        deviation_bound,
        deviation_ok,
        s0_threshold,
        s0_dim: k,
        c0_dim: c0.dim(),
        projector_distance,
        projector_bound,
        projector_ok,
        gap_above_s0,
        gap_lower_bound,
        gap_ok,
        sin_theta_distance,
        sin_theta_bound,
        sin_theta_ok: sin_theta_distance <= sin_theta_bound,
        pass: deviation_ok && projector_ok && gap_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderElements {
    /// `kappa <eta_alpha| H_out |eta_beta>` on the witness basis.
    pub measured: Vec<Vec<[f64; 2]>>,
    /// `kappa / (T+1) (delta_ab - Q_ab)`
    pub predicted: Vec<Vec<[f64; 2]>>,
    pub max_error: f64,
}

/// Matrix elements of `kappa H_out` between history states.
pub fn first_order_elements(kh: &KitaevHamiltonian) -> Result<FirstOrderElements> {
    let hist = history_isometry(&kh.circuit, kh.rep)?;
    let ho = linalg::matmul(kh.h_out.entries(), hist.as_ref());
    let m = linalg::scaled(linalg::adj_mul(hist.as_ref(), ho.as_ref()).as_ref(), linalg::re(kh.kappa));
    let q = acceptance_operator(&kh.circuit)?.q;
    let f = kh.kappa / (kh.steps as f64 + 1.0);
    let n = m.nrows();
    let p = Mat::from_fn(n, n, |i, j| (linalg::re((i == j) as u8 as f64) - q.get(i, j)) * f);
    Ok(FirstOrderElements {
        max_error: linalg::max_abs(linalg::sub(m.as_ref(), p.as_ref()).as_ref()),
        measured: matrix_rows(m.as_ref()),
        predicted: matrix_rows(p.as_ref()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdlingReport {
    pub original_steps: usize,
    pub idle_steps: usize,
    /// `T' = T + L`
    pub total_steps: usize,
    pub kappa: f64,
    pub completeness: f64,
    pub acceptance_gap: Option<f64>,
    pub accepting_dim: usize,
    /// `||Pi_C0 - Pi_E(L)||^2`
    pub measured: f64,
    /// `2 (1 - sqrt(L / T'))`
    pub bound: f64,
    pub pass: bool,
}

/// Distance between the accepting history states of the idled circuit and
/// their idling parts `sum_{t <= L} |gamma_t>` (normalized).
pub fn check_idling_faithfulness(
    circuit: &VerifierCircuit,
    l: usize,
    kappa: f64,
    c: f64,
) -> Result<IdlingReport> {
    let idled = idle_prefix(circuit, l);
    let tp = idled.len();
    if tp == 0 {
        return Err(Error::Precondition("idled circuit has no time steps".into()));
    }
    if !(kappa > 0.0 && kappa < kappa_limit(tp)) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} outside (0, 1/(2T'^3))")));
    }
    let aq = acceptance_operator(&idled)?;
    let gap = acceptance_gap(&aq, c).gap;
    check_hypothesis(gap, tp, kappa)?;
    let acc = accepting_vectors(&aq, c);
    let rep = super::ClockRep::ClockSubspace;
    let layout = super::kitaev_layout(&idled, rep)?;
    let hist = history_isometry(&idled, rep)?;
    let idle = history_isometry_over(&idled, rep, 0..=l)?;
    let c0 = Subspace::from_orthonormal(layout.clone(), linalg::matmul(hist.as_ref(), acc.as_ref()))?;
    let el = Subspace::from_orthonormal(layout, linalg::matmul(idle.as_ref(), acc.as_ref()))?;
    let d = subspace_distance(&c0, &el);
    let measured = d * d;
    let bound = 2.0 * (1.0 - (l as f64 / tp as f64).sqrt());
    Ok(IdlingReport {
        original_steps: circuit.len(),
        idle_steps: l,
        total_steps: tp,
        kappa,
        completeness: c,
        acceptance_gap: gap,
        accepting_dim: acc.ncols(),
        measured,
        bound,
        pass: measured <= bound + 1e-9,
    })
}

/// Builds the Hamiltonian for a circuit with the default `kappa`.
pub fn build_with_default_kappa(circuit: &VerifierCircuit, rep: super::ClockRep) -> Result<KitaevHamiltonian> {
    let aq = acceptance_operator(circuit)?;
    let g = acceptance_gap(&aq, circuit.completeness()).gap.unwrap_or(circuit.completeness());
    build_kitaev(circuit, default_kappa(g, circuit.len()), rep)
}
