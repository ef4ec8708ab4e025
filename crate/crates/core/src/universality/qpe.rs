//! The phase-estimation verifier: rotate `B'`, run controlled phase
//! estimation into `B`, move the `B' = 0` branch onto `|#...#>`, then a SWAP
//! test between `A'` and `B`.

use std::ops::Range;

use faer::Mat;
use serde::Serialize;

use super::{hash_index, TargetHamiltonian, WitnessFamily};
use crate::circuits::{acceptance_gap, acceptance_operator, gates, Gate, VerifierCircuit};
use crate::error::{Error, Result};
use crate::operators::linalg::{self, c, CMat};
use crate::operators::{subspace_distance, Register, RegisterRole, Subspace, SystemLayout};

/// Site ranges of the verifier registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QpeSites {
    /// SWAP-test control, also the output qubit.
    pub flag: usize,
    pub a: Range<usize>,
    pub a_prime: Range<usize>,
    pub b: Range<usize>,
    pub b_prime: usize,
}

/// `flag, A (n sites), A' (m), B (m), B'` in that order.
pub fn qpe_sites(n: usize, m: usize) -> QpeSites {
    QpeSites {
        flag: 0,
        a: 1..1 + n,
        a_prime: 1 + n..1 + n + m,
        b: 1 + n + m..1 + n + 2 * m,
        b_prime: 1 + n + 2 * m,
    }
}

fn layout_for(target: &TargetHamiltonian, m: usize) -> Result<SystemLayout> {
    let tl = target.h().layout();
    let n = tl.num_sites();
    let s = qpe_sites(n, m);
    let mut dims = vec![2];
    dims.extend_from_slice(tl.site_dims());
    dims.extend(std::iter::repeat_n(3, 2 * m));
    dims.push(2);
    SystemLayout::with_registers(
        dims,
        vec![
            Register::new("flag", RegisterRole::Output, s.flag, 1),
            Register::new("A", RegisterRole::Witness, s.a.start, n),
            Register::new("Aprime", RegisterRole::Readout, s.a_prime.start, m),
            Register::new("B", RegisterRole::Ancilla, s.b.start, m),
            Register::new("Bprime", RegisterRole::Control, s.b_prime, 1),
        ],
        tl.dim_cap(),
    )
}

/// `|0> -> (a|0> + |1>) / sqrt(a^2 + 1)` on `B'`.
fn rotation(a: f64) -> CMat {
    let n = (a * a + 1.0).sqrt();
    Mat::from_fn(2, 2, |i, j| c([[a, -1.0], [1.0, a]][i][j] / n, 0.0))
}

/// Controlled phase estimation on targets `[A..., B..., B']`.
///
/// On the binary subspace of `B` with `B' = 1` it is
/// `QFT^dagger . sum_k U^k (x) |k><k| . H^(x)m`, the identity elsewhere.
fn controlled_qpe(target: &TargetHamiltonian, fam: &WitnessFamily) -> CMat {
    let e = target.eigen();
    let d = target.dim();
    let m = fam.m;
    let n = 1usize << m;
    let dp = 3usize.pow(m as u32);
    let binary: Vec<usize> = (0..n).map(|k| super::readout_index(k, m)).collect();
    // U^k = e^{i (H + shift) tau k}
    let powers: Vec<CMat> = (0..n)
        .map(|k| e.function(|l| {
            let x = (l + fam.shift) * fam.tau * k as f64;
            c(x.cos(), x.sin())
        }))
        .collect();
    let inv = 1.0 / n as f64;
    let total = d * dp * 2;
    let mut g = linalg::identity(total);
    let on = d * dp;
    for &bj in &binary {
        for &bk in &binary {
            for a in 0..d {
                for a2 in 0..d {
                    g[(on + a + d * bj, on + a2 + d * bk)] = c(0.0, 0.0);
                }
            }
        }
    }
    for (j, &bj) in binary.iter().enumerate() {
        for (k2, &bk2) in binary.iter().enumerate() {
            for a in 0..d {
                for a2 in 0..d {
                    let mut s = c(0.0, 0.0);
                    for (k, uk) in powers.iter().enumerate() {
                        let ph = -2.0 * std::f64::consts::PI * (j * k) as f64 * inv;
                        let sign = if (k & k2).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        s += c(ph.cos(), ph.sin()) * uk[(a, a2)] * sign;
                    }
                    g[(on + a + d * bj, on + a2 + d * bk2)] = s * inv;
                }
            }
        }
    }
    g
}

/// Swaps `|B = 0...0, B' = 0>` with `|B = #...#, B' = 1>` on targets `[B..., B']`.
fn flag_branch(m: usize) -> CMat {
    let dp = 3usize.pow(m as u32);
    let mut perm: Vec<usize> = (0..2 * dp).collect();
    let hash_on = hash_index(m) + dp;
    perm.swap(0, hash_on);
    gates::permutation(&perm)
}

/// Controlled swap of `A'` and `B` on targets `[flag, A'..., B...]`.
fn controlled_swap(m: usize) -> CMat {
    let dp = 3usize.pow(m as u32);
    let mut perm = vec![0; 2 * dp * dp];
    for x in 0..dp {
        for y in 0..dp {
            perm[2 * (x + dp * y)] = 2 * (x + dp * y);
            perm[1 + 2 * (x + dp * y)] = 1 + 2 * (y + dp * x);
        }
    }
    gates::permutation(&perm)
}

/// The verifier circuit; accepts (output `|1>`) when the SWAP test reads 0.
///
/// Six coarse steps: `P_a`, controlled phase estimation, the flag-branch
/// permutation, `H`, controlled swap, `X H`.
pub fn qpe_verifier(target: &TargetHamiltonian, fam: &WitnessFamily) -> Result<VerifierCircuit> {
    if fam.psi.nrows() != target.dim() {
        return Err(Error::DimensionMismatch("witness family built for another target".into()));
    }
    let layout = layout_for(target, fam.m)?;
    let s = qpe_sites(target.h().layout().num_sites(), fam.m);
    let mut qpe_targets: Vec<usize> = s.a.clone().collect();
    qpe_targets.extend(s.b.clone());
    qpe_targets.push(s.b_prime);
    let mut branch_targets: Vec<usize> = s.b.clone().collect();
    branch_targets.push(s.b_prime);
    let mut swap_targets = vec![s.flag];
    swap_targets.extend(s.a_prime.clone());
    swap_targets.extend(s.b.clone());
    let xh = linalg::matmul(gates::x().as_ref(), gates::hadamard().as_ref());
    let steps = vec![
        Gate::new("rotate_b_prime", vec![s.b_prime], rotation(fam.a))?,
        Gate::new("controlled_qpe", qpe_targets, controlled_qpe(target, fam))?,
        Gate::new("flag_branch", branch_targets, flag_branch(fam.m))?,
        Gate::new("swap_test_h", vec![s.flag], gates::hadamard())?,
        Gate::new("swap_test_cswap", swap_targets, controlled_swap(fam.m))?,
        Gate::new("swap_test_xh", vec![s.flag], xh)?,
    ];
    VerifierCircuit::new(layout, steps, vec!["A".into(), "Aprime".into()], s.flag, 1.0, 0.5)
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapRow {
    pub mu: usize,
    pub energy: f64,
    /// `|<w_mu|phi_mu>|`
    pub overlap: f64,
    /// `(a^2 + 4/pi^2) / (a^2 + 1)`
    pub reference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifierReport {
    pub steps: usize,
    pub a: f64,
    pub top_eigenvalue: f64,
    pub top_multiplicity: usize,
    /// Largest eigenvalue of `Q` below the top cluster.
    pub second_eigenvalue: Option<f64>,
    /// `||Pi_L0 - Pi_W||`
    pub distance_to_witness_space: f64,
    /// `10 / a`
    pub distance_bound: f64,
    /// `max_mu ||phi_mu - (predicted eigenvector)||` against `Q phi = phi`.
    pub phi_residual: f64,
    pub overlaps: Vec<OverlapRow>,
    pub acceptance_gap: Option<f64>,
    pub pass: bool,
}

/// Spectrum of `Q(U_a)` and how its top eigenspace sits against `span{w_mu}`.
pub fn verifier_report(circuit: &VerifierCircuit, fam: &WitnessFamily) -> Result<VerifierReport> {
    let aq = acceptance_operator(circuit)?;
    let e = &aq.eigen;
    let clusters = e.clusters();
    let top = clusters.last().cloned().unwrap_or(0..0);
    let l0 = e.span_of(top.clone());
    let w = Subspace::from_orthonormal(l0.layout().clone(), fam.w.clone())?;
    let distance = subspace_distance(&l0, &w);
    let second_eigenvalue = (top.start > 0).then(|| e.values()[top.start - 1]);
    let qphi = linalg::matmul(aq.q.entries(), fam.phi.as_ref());
    let phi_residual = linalg::max_abs(linalg::sub(qphi.as_ref(), fam.phi.as_ref()).as_ref());
    let a = fam.a;
    let reference = (a * a + 4.0 / (std::f64::consts::PI * std::f64::consts::PI)) / (a * a + 1.0);
    let overlaps = (0..fam.w.ncols())
        .map(|mu| OverlapRow {
            mu,
            energy: fam.energies[mu],
            overlap: linalg::inner(fam.w.as_ref(), mu, fam.phi.as_ref(), mu).norm(),
            reference,
        })
        .collect();
    let gap = acceptance_gap(&aq, circuit.completeness()).gap;
    let distance_bound = 10.0 / a;
    Ok(VerifierReport {
        steps: circuit.len(),
        a,
        top_eigenvalue: e.max(),
        top_multiplicity: top.len(),
        second_eigenvalue,
        distance_to_witness_space: distance,
        distance_bound,
        phi_residual,
        overlaps,
        acceptance_gap: gap,
        pass: distance <= distance_bound && phi_residual <= 1e-9 && (e.max() - 1.0).abs() <= 1e-9,
    })
}
