//! The universality construction on small instances: a phase-estimation
//! verifier whose accepting witnesses carry their own energy, the
//! Hamiltonian `H' = sum_mu E_mu |w_mu><w_mu|` on those witnesses, flag
//! Hamiltonians, the assembled `H_sim`, and the simulation chain
//! `H_target -> H' -> H_sim`.
//!
//! Readout qutrits use the basis `|0>, |1>, |#>` (local indices 0, 1, 2).
//! Digit `j` of a readout has place value `2^j`.

mod pipeline;
mod qpe;

pub use pipeline::{end_to_end, EndToEndParams, FinalCertificate, HsimSummary, PipelineReport};
pub use qpe::{qpe_sites, qpe_verifier, verifier_report, OverlapRow, QpeSites, VerifierReport};

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::linalg::{self, c, CMat};
use crate::operators::{
    eigh, op_norm, tensor_embed, DenseOperator, EigenSystem, Register, RegisterRole, SystemLayout,
};
use crate::simulation::{verify_simulation, Encoding, SimulationReport};

/// Local index of `|#>` on a readout qutrit.
pub const HASH: usize = 2;

#[derive(Clone, Debug)]
pub struct TargetHamiltonian {
    h: DenseOperator,
    eigen: EigenSystem,
}

impl TargetHamiltonian {
    pub fn new(h: DenseOperator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian { asymmetry: h.max_asymmetry() });
        }
        let eigen = eigh(&h)?;
        Ok(TargetHamiltonian { h, eigen })
    }

    pub fn h(&self) -> &DenseOperator {
        &self.h
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn norm(&self) -> f64 {
        self.eigen.norm()
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// Witnesses `w_mu = psi_mu (a |#...#> + |E_mu>) / sqrt(a^2 + 1)` and the
/// phase-estimation data behind them.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessFamily {
    pub a: f64,
    /// Readout digits.
    pub m: usize,
    pub tau: f64,
    /// Added to `H_target` before exponentiation so all phases are `>= 0`.
    pub shift: f64,
    /// Energy of one readout step, `2 pi / (2^m tau)`.
    pub unit: f64,
    pub energies: Vec<f64>,
    pub readouts: Vec<usize>,
    /// `readout * unit - shift`
    pub readout_energies: Vec<f64>,
    #[serde(skip)]
    pub layout: SystemLayout,
    /// Columns `psi_mu`.
    #[serde(skip)]
    pub psi: CMat,
    /// Columns `w_mu` on `A (x) A'`.
    #[serde(skip)]
    pub w: CMat,
    /// Columns `phi_mu = psi_mu (a |#...#> + |alpha_mu>) / sqrt(a^2 + 1)`, the
    /// states the verifier actually accepts.
    #[serde(skip)]
    pub phi: CMat,
}

/// Index on `A'` of the readout string with value `v` (digits in `{0, 1}`).
pub fn readout_index(v: usize, m: usize) -> usize {
    (0..m).map(|j| ((v >> j) & 1) * 3usize.pow(j as u32)).sum()
}

/// Index on `A'` of `|#...#>`.
pub fn hash_index(m: usize) -> usize {
    3usize.pow(m as u32) - 1
}

/// Phase-estimation amplitudes `alpha_j = 2^-m sum_k e^{2 pi i k (theta - j/2^m)}`.
pub fn qpe_amplitudes(theta: f64, m: usize) -> Vec<faer::c64> {
    let n = 1usize << m;
    (0..n)
        .map(|j| {
            let mut s = c(0.0, 0.0);
            for k in 0..n {
                let x = 2.0 * std::f64::consts::PI * k as f64 * (theta - j as f64 / n as f64);
                s += c(x.cos(), x.sin());
            }
            s / n as f64
        })
        .collect()
}

/// `A (x) A'` with the target's sites first.
pub fn witness_layout(target: &TargetHamiltonian, m: usize) -> Result<SystemLayout> {
    let tl = target.h.layout();
    let n = tl.num_sites();
    let mut dims = tl.site_dims().to_vec();
    dims.extend(std::iter::repeat_n(3, m));
    SystemLayout::with_registers(
        dims,
        vec![Register::new("A", RegisterRole::Witness, 0, n), Register::new("Aprime", RegisterRole::Readout, n, m)],
        tl.dim_cap(),
    )
}

/// Builds the witness family. `tau` defaults to `pi / (2 (||H + shift|| + 1))`.
pub fn witness_family(target: &TargetHamiltonian, a: f64, m: usize, tau: Option<f64>) -> Result<WitnessFamily> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("flag weight a = {a} must be positive")));
    }
    if m == 0 || m > 8 {
        return Err(Error::InvalidParameter(format!("readout digits m = {m} outside 1..=8")));
    }
    let e = &target.eigen;
    let shift = -e.min();
    let width = e.max() - e.min();
    let tau = tau.unwrap_or(std::f64::consts::PI / (2.0 * (width + 1.0)));
    if !(tau > 0.0) || width * tau >= 2.0 * std::f64::consts::PI {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} must be positive with ||H + shift|| tau < 2 pi"
        )));
    }
    let n_read = 1usize << m;
    let unit = 2.0 * std::f64::consts::PI / (n_read as f64 * tau);
    let layout = witness_layout(target, m)?;
    let d = target.dim();
    let dp = 3usize.pow(m as u32);
    let norm = (a * a + 1.0).sqrt();
    let hash = hash_index(m);
    let mut readouts = Vec::with_capacity(d);
    let mut w = linalg::zeros(d * dp, d);
    let mut phi = linalg::zeros(d * dp, d);
    let psi = e.vectors().to_owned();
    let tol = e.cluster_tol();
    for mu in 0..d {
        let theta = (e.values()[mu] + shift) * tau / (2.0 * std::f64::consts::PI);
        let v = ((theta * n_read as f64).round() as usize) % n_read;
        for (nu, &other) in readouts.iter().enumerate() {
            if other == v && (e.values()[nu] - e.values()[mu]).abs() > tol {
                return Err(Error::ReadoutCollision {
                    first: e.values()[nu],
                    second: e.values()[mu],
                    digits: (0..m).rev().map(|j| if (v >> j) & 1 == 1 { '1' } else { '0' }).collect(),
                });
            }
        }
        readouts.push(v);
        let alpha = qpe_amplitudes(theta, m);
        for i in 0..d {
            let p = psi[(i, mu)];
            w[(i + d * hash, mu)] = p * (a / norm);
            w[(i + d * readout_index(v, m), mu)] += p / norm;
            phi[(i + d * hash, mu)] = p * (a / norm);
            for (j, &al) in alpha.iter().enumerate() {
                phi[(i + d * readout_index(j, m), mu)] += p * al / norm;
            }
        }
    }
    let readout_energies = readouts.iter().map(|&v| v as f64 * unit - shift).collect();
    Ok(WitnessFamily {
        a,
        m,
        tau,
        shift,
        unit,
        energies: e.values().to_vec(),
        readouts,
        readout_energies,
        layout,
        psi,
        w,
        phi,
    })
}

fn check_family(fam: &WitnessFamily) -> Result<()> {
    let defect = linalg::isometry_defect(fam.w.as_ref());
    if defect > 1e-9 {
        return Err(Error::NotOrthonormal { deviation: defect });
    }
    Ok(())
}

/// `H' = sum_mu E_mu |w_mu><w_mu|` on `A (x) A'`.
pub fn build_hprime(target: &TargetHamiltonian, fam: &WitnessFamily) -> Result<DenseOperator> {
    check_family(fam)?;
    if fam.psi.nrows() != target.dim() {
        return Err(Error::DimensionMismatch("witness family built for another target".into()));
    }
    let e = &fam.energies;
    let wl = Mat::from_fn(fam.w.nrows(), fam.w.ncols(), |i, j| fam.w[(i, j)] * e[j]);
    Ok(DenseOperator::hermitian_from(fam.layout.clone(), linalg::mul_adj(wl.as_ref(), fam.w.as_ref())))
}

#[derive(Clone, Debug, Serialize)]
pub struct WTildeReport {
    /// `||W - W~||`
    pub norm_diff: f64,
    /// `sqrt(2 (1 - a / sqrt(a^2 + 1)))`, the exact value for this pair.
    pub closed_form: f64,
    /// `2 (1 - a / sqrt(a^2 + 1))`, the commonly quoted reference curve.
    pub reference: f64,
    pub exceeds_reference: bool,
    /// Cut used for the witness-space certificate.
    pub delta: f64,
    /// `H'` (lifted off the witness space) simulating `H_target` through `W`.
    pub simulation: SimulationReport,
    #[serde(skip)]
    pub w: CMat,
    #[serde(skip)]
    pub w_tilde: CMat,
}

/// `W = 1 (x) |#...#>` and `W~ = sum_mu |w_mu><psi_mu|`, both `A -> A (x) A'`.
pub fn wtilde_maps(fam: &WitnessFamily) -> (CMat, CMat) {
    let d = fam.psi.nrows();
    let hash = hash_index(fam.m);
    let mut w = linalg::zeros(fam.w.nrows(), d);
    for i in 0..d {
        w[(i + d * hash, i)] = c(1.0, 0.0);
    }
    let w_tilde = linalg::mul_adj(fam.w.as_ref(), fam.psi.as_ref());
    (w, w_tilde)
}

/// Compares the local encoding `W` with `W~` and certifies the witness-space
/// operator as a simulation of `H_target`.
///
/// `H'` vanishes on the complement of `span{w_mu}`; that complement is lifted
/// to `2 Delta` so the cut `Delta = max(lambda_max, 0) + 1` isolates the
/// witness space.
pub fn wtilde_encodings(target: &TargetHamiltonian, fam: &WitnessFamily) -> Result<WTildeReport> {
    let hp = build_hprime(target, fam)?;
    let (w, w_tilde) = wtilde_maps(fam);
    let norm_diff = linalg::spectral_norm(linalg::sub(w.as_ref(), w_tilde.as_ref()).as_ref())?;
    let a = fam.a;
    let ratio = a / (a * a + 1.0).sqrt();
    let reference = 2.0 * (1.0 - ratio);
    let closed_form = (2.0 * (1.0 - ratio)).sqrt();

    let delta = target.eigen.max().max(0.0) + 1.0;
    let n = fam.w.nrows();
    let pw = linalg::mul_adj(fam.w.as_ref(), fam.w.as_ref());
    let lift = linalg::scaled(linalg::sub(linalg::identity(n).as_ref(), pw.as_ref()).as_ref(), c(2.0 * delta, 0.0));
    let lifted = DenseOperator::hermitian_from(fam.layout.clone(), linalg::add(hp.entries(), lift.as_ref()));
    let enc = Encoding::isometry(fam.layout.clone(), target.dim(), w.clone())?;
    let simulation = verify_simulation(target.h(), &lifted, &enc, delta)?;
    Ok(WTildeReport {
        norm_diff,
        closed_form,
        reference,
        exceeds_reference: norm_diff > reference + 1e-9,
        delta,
        simulation,
        w,
        w_tilde,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlagHamiltonian {
    pub state: Vec<[f64; 2]>,
    /// `|f><f|`: eigenvalue 1 on `f`, 0 on its complement.
    pub h: DenseOperator,
}

/// Flag Hamiltonian of a single-qudit state with the identity state encoding.
pub fn flag_hamiltonian(f: &[faer::c64]) -> Result<FlagHamiltonian> {
    let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("flag state has norm {norm}")));
    }
    let layout = SystemLayout::new(vec![f.len()])?;
    let h = DenseOperator::outer(layout, f, f)?.with_hermitian_flag(true)?;
    Ok(FlagHamiltonian { state: f.iter().map(|z| [z.re, z.im]).collect(), h })
}

/// `Delta (H_LS - lambda_min) + a sum_k 2^k H_f_k` with flag `k` on `sites[k]`.
pub fn build_hsim(
    h_ls: &DenseOperator,
    lambda_min: f64,
    flags: &[FlagHamiltonian],
    sites: &[usize],
    delta: f64,
    a: f64,
) -> Result<DenseOperator> {
    if flags.len() != sites.len() {
        return Err(Error::DimensionMismatch(format!("{} flags for {} sites", flags.len(), sites.len())));
    }
    let layout = h_ls.layout();
    let mut out = h_ls.shift(-lambda_min).scale(delta);
    for (k, (f, &s)) in flags.iter().zip(sites).enumerate() {
        if s >= layout.num_sites() || layout.site_dims()[s] != f.h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "flag {k} of dimension {} does not fit site {s}",
                f.h.dim()
            )));
        }
        let term = tensor_embed(&f.h, &[s], layout)?;
        out = &out + &term.scale(a * (1u64 << k) as f64);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderReport {
    pub delta: f64,
    pub constant: f64,
    pub h1_norm: f64,
    /// `||H0 U||`
    pub ground_residual: f64,
    /// Smallest eigenvalue of `H0` above its kernel.
    pub next_eigenvalue: f64,
    /// `||U H_target U^dagger - Pi H1 Pi||`
    pub requirement: f64,
    pub epsilon: f64,
    /// `||U - V~||`
    pub isometry_error: f64,
    /// `C ||H1|| / Delta`
    pub isometry_bound: f64,
    /// `||V~ H_target V~^dagger - H_sim,<Delta/2||`
    pub energy_error: f64,
    /// `C ||H1||^2 / Delta + epsilon / 2`
    pub energy_bound: f64,
    pub pass: bool,
}

/// Measures both conclusions of the first-order simulation lemma for
/// `H_sim = Delta H0 + H1`.
pub fn first_order_sim_check(
    h0: &DenseOperator,
    h1: &DenseOperator,
    delta: f64,
    u: &CMat,
    h_target: &DenseOperator,
    epsilon: f64,
    constant: f64,
) -> Result<FirstOrderReport> {
    let k = u.ncols();
    if u.nrows() != h0.dim() || h1.dim() != h0.dim() || h_target.dim() != k {
        return Err(Error::DimensionMismatch("H0, H1, U and H_target shapes disagree".into()));
    }
    let e0 = eigh(h0)?;
    let tol = 1e-8 * op_norm(h0).max(1.0);
    let ground_residual = linalg::spectral_norm(linalg::matmul(h0.entries(), u.as_ref()).as_ref())?;
    let next_eigenvalue = e0.values().get(k).copied().unwrap_or(f64::INFINITY);
    if ground_residual > tol || e0.values()[..k].iter().any(|v| v.abs() > tol) {
        return Err(Error::Precondition(format!(
            "H0 does not vanish on range(U) (||H0 U|| = {ground_residual:e}, tolerance {tol:e})"
        )));
    }
    if next_eigenvalue < 1.0 - tol {
        return Err(Error::Precondition(format!(
            "next eigenvalue of H0 is {next_eigenvalue}, below 1 by {:e}",
            1.0 - next_eigenvalue
        )));
    }
    let compressed = linalg::adj_mul(u.as_ref(), linalg::matmul(h1.entries(), u.as_ref()).as_ref());
    let requirement =
        linalg::spectral_norm(linalg::sub(h_target.entries(), compressed.as_ref()).as_ref())?;
    if requirement > epsilon / 2.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "||U H U^dagger - Pi H1 Pi|| = {requirement} exceeds epsilon / 2 = {} by {:e}",
            epsilon / 2.0,
            requirement - epsilon / 2.0
        )));
    }
    let hsim = &h0.scale(delta) + h1;
    let enc = Encoding::isometry(h0.layout().clone(), k, u.clone())?;
    let rep = verify_simulation(h_target, &hsim, &enc, delta / 2.0)?;
    let h1_norm = op_norm(h1);
    let isometry_bound = constant * h1_norm / delta;
    let energy_bound = constant * h1_norm * h1_norm / delta + epsilon / 2.0;
    Ok(FirstOrderReport {
        delta,
        constant,
        h1_norm,
        ground_residual,
        next_eigenvalue,
        requirement,
        epsilon,
        isometry_error: rep.eta,
        isometry_bound,
        energy_error: rep.epsilon,
        energy_bound,
        pass: rep.eta <= isometry_bound + 1e-12 && rep.epsilon <= energy_bound + 1e-12,
    })
}
