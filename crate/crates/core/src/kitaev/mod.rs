//! Circuit-to-Hamiltonian compilation with a clock register.
//!
//! The clock is appended after the circuit sites. In [`ClockRep::ClockSubspace`]
//! it is a single `(T+1)`-level site holding `|t>`; in
//! [`ClockRep::UnaryFullSpace`] it is `T` qubits holding `|1^t 0^{T-t}>`, with
//! clock qubit `c_1` on the lowest site.

mod geometry;
mod lemma;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::circuits::VerifierCircuit;
use crate::error::{Error, Result};
use crate::operators::linalg::{self, CMat};
use crate::operators::{DenseOperator, RegisterRole, SystemLayout};

pub use geometry::{geometrical_bound, ground_space, spectral_gap_above, GeometricalBound};
pub use lemma::{
    build_with_default_kappa, check_hmk_lemma, check_idling_faithfulness, default_kappa, first_order_elements, FirstOrderElements,
    HmkLemmaReport, HmkRow, IdlingReport,
};

pub const CLOCK_REGISTER: &str = "clock";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockRep {
    UnaryFullSpace,
    #[default]
    ClockSubspace,
}

impl ClockRep {
    fn site_dims(self, steps: usize) -> Vec<usize> {
        match self {
            ClockRep::ClockSubspace => vec![steps + 1],
            ClockRep::UnaryFullSpace => vec![2; steps],
        }
    }

    /// Clock-factor index of the legal state for time `t`.
    pub fn code(self, t: usize) -> usize {
        match self {
            ClockRep::ClockSubspace => t,
            ClockRep::UnaryFullSpace => (1usize << t) - 1,
        }
    }
}

/// Circuit layout with the clock register appended.
pub fn kitaev_layout(circuit: &VerifierCircuit, rep: ClockRep) -> Result<SystemLayout> {
    let steps = circuit.len();
    if steps == 0 {
        return Err(Error::Precondition("a clock needs at least one time step".into()));
    }
    circuit
        .layout()
        .extended(&rep.site_dims(steps), Some((CLOCK_REGISTER, RegisterRole::Clock)))
}

#[derive(Clone, Debug)]
pub struct KitaevHamiltonian {
    pub h_in: DenseOperator,
    pub h_prop: DenseOperator,
    pub h_out: DenseOperator,
    pub h_clock: DenseOperator,
    pub kappa: f64,
    pub steps: usize,
    pub circuit: VerifierCircuit,
    pub rep: ClockRep,
}

impl KitaevHamiltonian {
    pub fn layout(&self) -> &SystemLayout {
        self.h_in.layout()
    }

    /// `H_in + H_prop + H_clock`
    pub fn h0(&self) -> DenseOperator {
        &(&self.h_in + &self.h_prop) + &self.h_clock
    }

    /// `H_in + H_prop + kappa H_out + H_clock`
    pub fn h_mk(&self) -> DenseOperator {
        &self.h0() + &self.h_out.scale(self.kappa)
    }
}

/// Largest admissible `kappa` (exclusive): `1 / (2 T^3)`.
pub fn kappa_limit(steps: usize) -> f64 {
    1.0 / (2.0 * (steps as f64).powi(3))
}

/// Components of the modified Kitaev Hamiltonian.
pub fn build_kitaev(circuit: &VerifierCircuit, kappa: f64, rep: ClockRep) -> Result<KitaevHamiltonian> {
    let layout = kitaev_layout(circuit, rep)?;
    let steps = circuit.len();
    if !(kappa > 0.0 && kappa < kappa_limit(steps)) {
        return Err(Error::InvalidParameter(format!(
            "kappa = {kappa} outside (0, 1/(2T^3)) = (0, {}) for T = {steps}",
            kappa_limit(steps)
        )));
    }
    let d = circuit.layout().total_dim();
    let clock_dim = layout.total_dim() / d;
    let cl = circuit.layout();
    let ancillas = circuit.ancilla_sites();
    let unpinned: Vec<f64> = (0..d)
        .map(|q| ancillas.iter().filter(|&&s| cl.digit(q, s) != 0).count() as f64)
        .collect();
    let rejecting: Vec<f64> =
        (0..d).map(|q| if cl.digit(q, circuit.output_site()) == 1 { 0.0 } else { 1.0 }).collect();

    let (in_clock, out_clock): (Vec<bool>, Vec<bool>) = match rep {
        ClockRep::ClockSubspace => ((0..clock_dim).map(|t| t == 0).collect(), (0..clock_dim).map(|t| t == steps).collect()),
        ClockRep::UnaryFullSpace => (
            (0..clock_dim).map(|b| b & 1 == 0).collect(),
            (0..clock_dim).map(|b| (b >> (steps - 1)) & 1 == 1).collect(),
        ),
    };
    let diag = |f: &dyn Fn(usize, usize) -> f64| {
        let v: Vec<f64> = (0..d * clock_dim).map(|i| f(i % d, i / d)).collect();
        DenseOperator::from_real_diagonal(layout.clone(), &v)
    };
    let h_in = diag(&|q, b| if in_clock[b] { unpinned[q] } else { 0.0 })?;
    let h_out = diag(&|q, b| if out_clock[b] { rejecting[q] } else { 0.0 })?;
    let h_clock = match rep {
        ClockRep::ClockSubspace => DenseOperator::zeros(layout.clone()),
        ClockRep::UnaryFullSpace => diag(&|_, b| {
            (0..steps.saturating_sub(1))
                .filter(|&k| (b >> k) & 1 == 0 && (b >> (k + 1)) & 1 == 1)
                .count() as f64
        })?,
    };

    let n = d * clock_dim;
    let mut prop = linalg::zeros(n, n);
    let half = linalg::re(0.5);
    for t in 1..=steps {
        let u = circuit.gates()[t - 1].embedded(cl)?;
        let transition = |prop: &mut CMat, from: usize, to: usize| {
            for q2 in 0..d {
                for q1 in 0..d {
                    let x = u[(q2, q1)];
                    if x != linalg::re(0.0) {
                        prop[(q2 + d * to, q1 + d * from)] -= half * x;
                        prop[(q1 + d * from, q2 + d * to)] -= half * x.conj();
                    }
                }
            }
        };
        match rep {
            ClockRep::ClockSubspace => {
                for q in 0..d {
                    prop[(q + d * t, q + d * t)] += half;
                    prop[(q + d * (t - 1), q + d * (t - 1))] += half;
                }
                transition(&mut prop, t - 1, t);
            }
            ClockRep::UnaryFullSpace => {
                let bit = t - 1;
                for b in 0..clock_dim {
                    let prev_set = t == 1 || (b >> (bit - 1)) & 1 == 1;
                    let next_clear = t == steps || (b >> (bit + 1)) & 1 == 0;
                    if !(prev_set && next_clear) {
                        continue;
                    }
                    for q in 0..d {
                        prop[(q + d * b, q + d * b)] += half;
                    }
                    if (b >> bit) & 1 == 0 {
                        transition(&mut prop, b, b | (1 << bit));
                    }
                }
            }
        }
    }
    let h_prop = DenseOperator::hermitian(layout, prop)?;
    Ok(KitaevHamiltonian {
        h_in,
        h_prop,
        h_out,
        h_clock,
        kappa,
        steps,
        circuit: circuit.clone(),
        rep,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryState {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub vector: Vec<c64>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub witness: Vec<c64>,
    pub idle_split: Option<usize>,
}

pub(crate) fn serialize_complex_vec<S: serde::Serializer>(
    v: &[c64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Columns `|gamma_t(e_w)>` summed over `t in times`, normalized by
/// `1/sqrt(|times|)`: the history isometry restricted to those clock values.
pub fn history_isometry_over(
    circuit: &VerifierCircuit,
    rep: ClockRep,
    times: std::ops::RangeInclusive<usize>,
) -> Result<CMat> {
    let layout = kitaev_layout(circuit, rep)?;
    let d = circuit.layout().total_dim();
    let (lo, hi) = (*times.start(), *times.end());
    if hi > circuit.len() || lo > hi {
        return Err(Error::InvalidParameter(format!("time window {lo}..={hi} outside 0..={}", circuit.len())));
    }
    let norm = linalg::re(1.0 / ((hi - lo + 1) as f64).sqrt());
    let mut x = circuit.initial_isometry();
    let k = x.ncols();
    let mut out = linalg::zeros(layout.total_dim(), k);
    x = circuit.evolve_prefix(lo, x)?;
    for t in lo..=hi {
        if t > lo {
            let g = &circuit.gates()[t - 1];
            if !g.targets().is_empty() {
                x = crate::operators::apply_local(g.unitary().as_ref(), g.targets(), circuit.layout(), x.as_ref())?;
            }
        }
        let off = d * rep.code(t);
        for j in 0..k {
            for q in 0..d {
                out[(q + off, j)] = x[(q, j)] * norm;
            }
        }
    }
    Ok(out)
}

/// Isometry `alpha -> |eta^(0, alpha)>` from the witness space.
pub fn history_isometry(circuit: &VerifierCircuit, rep: ClockRep) -> Result<CMat> {
    history_isometry_over(circuit, rep, 0..=circuit.len())
}

/// Uniform superposition over time steps of the partially applied circuit.
pub fn history_state(circuit: &VerifierCircuit, alpha: &[c64], rep: ClockRep) -> Result<HistoryState> {
    let v = history_isometry(circuit, rep)?;
    Ok(HistoryState { vector: apply_to(&v, alpha)?, witness: alpha.to_vec(), idle_split: None })
}

/// History state written as `sqrt((L+1)/(T+1)) |idle> + sqrt((T-L)/(T+1)) |comp>`,
/// with the idle part over clock values `0..=L`.
pub fn idling_history_state(
    circuit: &VerifierCircuit,
    alpha: &[c64],
    l: usize,
    rep: ClockRep,
) -> Result<HistoryState> {
    let steps = circuit.len();
    if l > steps {
        return Err(Error::InvalidParameter(format!("idle split {l} exceeds T = {steps}")));
    }
    let idle = apply_to(&history_isometry_over(circuit, rep, 0..=l)?, alpha)?;
    let a = (((l + 1) as f64) / ((steps + 1) as f64)).sqrt();
    let mut vector: Vec<c64> = idle.iter().map(|z| z * a).collect();
    if l < steps {
        let comp = apply_to(&history_isometry_over(circuit, rep, l + 1..=steps)?, alpha)?;
        let b = (((steps - l) as f64) / ((steps + 1) as f64)).sqrt();
        for (v, c) in vector.iter_mut().zip(comp) {
            *v += c * b;
        }
    }
    Ok(HistoryState { vector, witness: alpha.to_vec(), idle_split: Some(l) })
}

fn apply_to(m: &CMat, alpha: &[c64]) -> Result<Vec<c64>> {
    if alpha.len() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "witness state of length {} for witness dimension {}",
            alpha.len(),
            m.ncols()
        )));
    }
    let norm: f64 = alpha.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("witness state has norm {norm}")));
    }
    let a = Mat::from_fn(alpha.len(), 1, |i, _| alpha[i]);
    Ok(linalg::column(linalg::matmul(m.as_ref(), a.as_ref()).as_ref(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{gates, Gate};
    use crate::operators::{Register, DEFAULT_DIM_CAP};

    fn witness_only(gs: Vec<Gate>) -> VerifierCircuit {
        let layout = SystemLayout::with_registers(
            vec![2],
            vec![Register::new("A", RegisterRole::Witness, 0, 1)],
            DEFAULT_DIM_CAP,
        )
        .unwrap();
        VerifierCircuit::new(layout, gs, vec!["A".into()], 0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn x_history_state() {
        let c = witness_only(vec![Gate::new("x", vec![0], gates::x()).unwrap()]);
        let h = history_state(&c, &[linalg::re(1.0), linalg::re(0.0)], ClockRep::ClockSubspace).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // index = witness + 2 * t
        let expect = [s, 0.0, 0.0, s];
        for (z, e) in h.vector.iter().zip(expect) {
            assert!((z - linalg::re(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn kappa_range_enforced() {
        let c = witness_only(vec![Gate::idle(), Gate::idle()]);
        assert!(build_kitaev(&c, 1.0 / 16.0, ClockRep::ClockSubspace).is_err());
        assert!(build_kitaev(&c, 0.0, ClockRep::ClockSubspace).is_err());
        assert!(build_kitaev(&c, 1e-3, ClockRep::ClockSubspace).is_ok());
        let empty = witness_only(vec![]);
        assert!(build_kitaev(&empty, 1e-3, ClockRep::ClockSubspace).is_err());
    }

    #[test]
    fn unary_clock_codes() {
        assert_eq!(ClockRep::UnaryFullSpace.code(0), 0);
        assert_eq!(ClockRep::UnaryFullSpace.code(3), 0b111);
        assert_eq!(ClockRep::ClockSubspace.code(3), 3);
    }
}
