//! Gate-level verifier circuits, acceptance operators and idling.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::linalg::{self, CMat};
use crate::operators::{
    apply_local, check_targets, eigh, DenseOperator, EigenSystem, SystemLayout, CLUSTER_RTOL,
};

/// Tolerance on `max |U^dagger U - 1|` for gates.
pub const UNITARY_TOL: f64 = 1e-10;

pub const IDENTITY_LABEL: &str = "identity";

#[derive(Clone, Debug)]
pub struct Gate {
    label: String,
    targets: Vec<usize>,
    unitary: CMat,
}

impl Gate {
    /// Gate acting as `unitary` on `targets`; the first target is the
    /// fastest-varying digit of the local index.
    pub fn new(label: impl Into<String>, targets: Vec<usize>, unitary: CMat) -> Result<Self> {
        let label = label.into();
        if unitary.nrows() != unitary.ncols() {
            return Err(Error::DimensionMismatch(format!("gate `{label}` is not square")));
        }
        let deviation = linalg::isometry_defect(unitary.as_ref());
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation, label: Some(label) });
        }
        for (k, t) in targets.iter().enumerate() {
            if targets[..k].contains(t) {
                return Err(Error::InvalidParameter(format!("gate `{label}` repeats target {t}")));
            }
        }
        Ok(Gate { label, targets, unitary })
    }

    /// Identity step acting on no site.
    pub fn idle() -> Self {
        Gate { label: IDENTITY_LABEL.into(), targets: Vec::new(), unitary: linalg::identity(1) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    /// The gate as an operator on the whole of `layout`.
    pub fn embedded(&self, layout: &SystemLayout) -> Result<CMat> {
        crate::operators::embed_matrix(self.unitary.as_ref(), &self.targets, layout)
    }

    fn check_against(&self, layout: &SystemLayout) -> Result<()> {
        check_targets(&self.targets, layout).map_err(|e| {
            Error::InvalidParameter(format!("gate `{}`: {e}", self.label))
        })?;
        let local: usize = self.targets.iter().map(|&s| layout.site_dims()[s]).product();
        if local != self.unitary.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "gate `{}` is {}x{} but its targets span dimension {local}",
                self.label,
                self.unitary.nrows(),
                self.unitary.ncols()
            )));
        }
        Ok(())
    }
}

/// A verifier: gates applied in order to `witness ⊗ |0...0>`, accepting when
/// the output site reads `|1>`.
#[derive(Clone, Debug)]
pub struct VerifierCircuit {
    layout: SystemLayout,
    gates: Vec<Gate>,
    witness_registers: Vec<String>,
    witness_sites: Vec<usize>,
    output_site: usize,
    completeness: f64,
    soundness: f64,
}

impl VerifierCircuit {
    /// `witness_registers` name registers of `layout`; every other site is an
    /// ancilla initialised to `|0>`.
    pub fn new(
        layout: SystemLayout,
        gates: Vec<Gate>,
        witness_registers: Vec<String>,
        output_site: usize,
        completeness: f64,
        soundness: f64,
    ) -> Result<Self> {
        let mut witness_sites = Vec::new();
        for name in &witness_registers {
            let reg = layout
                .register(name)
                .ok_or_else(|| Error::InvalidParameter(format!("no register named `{name}`")))?;
            witness_sites.extend(reg.sites());
        }
        witness_sites.sort_unstable();
        witness_sites.dedup();
        if output_site >= layout.num_sites() {
            return Err(Error::InvalidParameter(format!("output site {output_site} out of range")));
        }
        if layout.site_dims()[output_site] < 2 {
            return Err(Error::InvalidParameter("output site cannot hold |1>".into()));
        }
        if !(completeness > 0.0 && completeness <= 1.0) {
            return Err(Error::InvalidParameter(format!("completeness {completeness} not in (0, 1]")));
        }
        if !(soundness >= 0.0 && soundness < completeness) {
            return Err(Error::InvalidParameter(format!(
                "soundness {soundness} not in [0, {completeness})"
            )));
        }
        for g in &gates {
            g.check_against(&layout)?;
        }
        Ok(VerifierCircuit {
            layout,
            gates,
            witness_registers,
            witness_sites,
            output_site,
            completeness,
            soundness,
        })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of time steps `T`.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn witness_registers(&self) -> &[String] {
        &self.witness_registers
    }

    pub fn witness_sites(&self) -> &[usize] {
        &self.witness_sites
    }

    /// Sites initialised to `|0>`, including the output site unless it is
    /// part of the witness.
    pub fn ancilla_sites(&self) -> Vec<usize> {
        (0..self.layout.num_sites()).filter(|s| !self.witness_sites.contains(s)).collect()
    }

    pub fn ancilla_count(&self) -> usize {
        self.layout.num_sites() - self.witness_sites.len()
    }

    pub fn output_site(&self) -> usize {
        self.output_site
    }

    pub fn completeness(&self) -> f64 {
        self.completeness
    }

    pub fn soundness(&self) -> f64 {
        self.soundness
    }

    pub fn witness_layout(&self) -> SystemLayout {
        self.layout.sublayout(&self.witness_sites).expect("witness sites are in range")
    }

    pub fn witness_dim(&self) -> usize {
        self.witness_sites.iter().map(|&s| self.layout.site_dims()[s]).product()
    }

    /// Full-space indices of `|w> ⊗ |0...0>_ancilla`, in witness index order.
    pub fn initial_indices(&self) -> Vec<usize> {
        self.layout.local_offsets(&self.witness_sites)
    }

    /// Isometry embedding the witness space with ancillas in `|0>`.
    pub fn initial_isometry(&self) -> CMat {
        let idx = self.initial_indices();
        let mut m = linalg::zeros(self.layout.total_dim(), idx.len());
        for (j, &i) in idx.iter().enumerate() {
            m[(i, j)] = linalg::re(1.0);
        }
        m
    }

    /// `U_t ... U_1 x` for the first `t` gates.
    pub fn evolve_prefix(&self, t: usize, x: CMat) -> Result<CMat> {
        let mut x = x;
        for g in &self.gates[..t] {
            if g.targets.is_empty() {
                continue;
            }
            x = apply_local(g.unitary.as_ref(), &g.targets, &self.layout, x.as_ref())?;
        }
        Ok(x)
    }

    /// Projector onto the accepting outcome, as a diagonal mask.
    pub fn accept_mask(&self) -> Vec<bool> {
        (0..self.layout.total_dim()).map(|i| self.layout.digit(i, self.output_site) == 1).collect()
    }

    /// Same circuit with different gates.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Self> {
        VerifierCircuit::new(
            self.layout.clone(),
            gates,
            self.witness_registers.clone(),
            self.output_site,
            self.completeness,
            self.soundness,
        )
    }
}

/// `U = U_T ... U_1` on the full circuit space.
pub fn compile_unitary(circuit: &VerifierCircuit) -> Result<DenseOperator> {
    let n = circuit.layout.total_dim();
    let u = circuit.evolve_prefix(circuit.len(), linalg::identity(n))?;
    DenseOperator::new(circuit.layout.clone(), u)
}

#[derive(Clone, Debug)]
pub struct AcceptanceOperator {
    pub q: DenseOperator,
    pub eigen: EigenSystem,
    pub completeness: f64,
}

/// `Q = <0|U^dagger Pi_out U|0>` on the witness space.
pub fn acceptance_operator(circuit: &VerifierCircuit) -> Result<AcceptanceOperator> {
    let x = circuit.evolve_prefix(circuit.len(), circuit.initial_isometry())?;
    let mask = circuit.accept_mask();
    let k = x.ncols();
    let q = Mat::from_fn(k, k, |i, j| {
        let mut s = linalg::re(0.0);
        for (r, &acc) in mask.iter().enumerate() {
            if acc {
                s += x[(r, i)].conj() * x[(r, j)];
            }
        }
        s
    });
    let q = DenseOperator::hermitian_from(circuit.witness_layout(), q);
    let eigen = eigh(&q)?;
    Ok(AcceptanceOperator { q, eigen, completeness: circuit.completeness })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceGap {
    /// `c - lambda_x`, or `None` when no eigenvalue lies below `c`.
    pub gap: Option<f64>,
    /// Largest eigenvalue below `c`.
    pub lambda_below: Option<f64>,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

impl AcceptanceGap {
    pub fn is_gapped(&self) -> bool {
        self.gap.is_some()
    }
}

/// Distance from `c` to the largest eigenvalue strictly below it.
///
/// Eigenvalues within `1e-9` of `c` count as equal to `c`.
pub fn acceptance_gap(q: &AcceptanceOperator, c: f64) -> AcceptanceGap {
    let values = q.eigen.values().to_vec();
    let tol = CLUSTER_RTOL * q.eigen.norm().max(1.0);
    let lambda_below = values.iter().copied().filter(|&v| v < c - tol).last();
    AcceptanceGap { gap: lambda_below.map(|l| c - l), lambda_below, eigenvalues: values }
}

/// The circuit with `l` identity steps prepended.
pub fn idle_prefix(circuit: &VerifierCircuit, l: usize) -> VerifierCircuit {
    let mut gates: Vec<Gate> = (0..l).map(|_| Gate::idle()).collect();
    gates.extend(circuit.gates.iter().cloned());
    VerifierCircuit { gates, ..circuit.clone() }
}

// JSON form ------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateJson {
    pub label: String,
    pub targets: Vec<usize>,
    /// Row-major `[re, im]` pairs.
    pub unitary: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegisterNames {
    One(String),
    Many(Vec<String>),
}

impl RegisterNames {
    pub fn into_vec(self) -> Vec<String> {
        match self {
            RegisterNames::One(s) => vec![s],
            RegisterNames::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitJson {
    pub layout: SystemLayout,
    pub gates: Vec<GateJson>,
    pub witness_register: RegisterNames,
    pub output_site: usize,
    pub c: f64,
    pub s: f64,
}

impl GateJson {
    pub fn into_gate(self) -> Result<Gate> {
        let n = (self.unitary.len() as f64).sqrt().round() as usize;
        if n * n != self.unitary.len() {
            return Err(Error::DimensionMismatch(format!(
                "gate `{}` has {} entries, not a square matrix",
                self.label,
                self.unitary.len()
            )));
        }
        let m = Mat::from_fn(n, n, |i, j| {
            let [re, im] = self.unitary[i * n + j];
            c64::new(re, im)
        });
        Gate::new(self.label, self.targets, m)
    }
}

impl From<&Gate> for GateJson {
    fn from(g: &Gate) -> Self {
        let n = g.unitary.nrows();
        let mut unitary = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = g.unitary[(i, j)];
                unitary.push([z.re, z.im]);
            }
        }
        GateJson { label: g.label.clone(), targets: g.targets.clone(), unitary }
    }
}

impl CircuitJson {
    pub fn into_circuit(self) -> Result<VerifierCircuit> {
        let gates = self.gates.into_iter().map(GateJson::into_gate).collect::<Result<Vec<_>>>()?;
        VerifierCircuit::new(
            self.layout,
            gates,
            self.witness_register.into_vec(),
            self.output_site,
            self.c,
            self.s,
        )
    }
}

impl From<&VerifierCircuit> for CircuitJson {
    fn from(c: &VerifierCircuit) -> Self {
        CircuitJson {
            layout: c.layout.clone(),
            gates: c.gates.iter().map(GateJson::from).collect(),
            witness_register: RegisterNames::Many(c.witness_registers.clone()),
            output_site: c.output_site,
            c: c.completeness,
            s: c.soundness,
        }
    }
}

impl Serialize for VerifierCircuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for VerifierCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CircuitJson::deserialize(d)?.into_circuit().map_err(serde::de::Error::custom)
    }
}

/// Common single- and two-qubit gates.
pub mod gates {
    use super::*;

    fn real(n: usize, rows: &[f64]) -> CMat {
        Mat::from_fn(n, n, |i, j| linalg::re(rows[i * n + j]))
    }

    pub fn x() -> CMat {
        real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn z() -> CMat {
        real(2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn hadamard() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        real(2, &[s, s, s, -s])
    }

    /// CNOT with the control on the first target (local digit 0) and the
    /// target on the second.
    pub fn cnot() -> CMat {
        // local index = control + 2 * target; flip the target when control = 1
        let mut m = linalg::zeros(4, 4);
        for c in 0..2 {
            for t in 0..2 {
                let from = c + 2 * t;
                let to = c + 2 * (t ^ c);
                m[(to, from)] = linalg::re(1.0);
            }
        }
        m
    }

    /// Permutation matrix sending basis state `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> CMat {
        let n = perm.len();
        let mut m = linalg::zeros(n, n);
        for (j, &p) in perm.iter().enumerate() {
            m[(p, j)] = linalg::re(1.0);
        }
        m
    }
}

/// Small circuits used as fixtures across the crate and the command line.
pub mod library {
    use rand::Rng;

    use super::*;
    use crate::operators::{random, Register, RegisterRole, DEFAULT_DIM_CAP};

    fn witness_qubits(n: usize, ancillas: usize) -> Result<SystemLayout> {
        let mut regs = vec![Register::new("A", RegisterRole::Witness, 0, n)];
        if ancillas > 0 {
            regs.push(Register::new("B", RegisterRole::Ancilla, n, ancillas));
        }
        SystemLayout::with_registers(vec![2; n + ancillas], regs, DEFAULT_DIM_CAP)
    }

    /// `steps` identity gates on a single witness qubit, which is also the output.
    pub fn identity(steps: usize) -> Result<VerifierCircuit> {
        let gates = (0..steps).map(|_| Gate::idle()).collect();
        VerifierCircuit::new(witness_qubits(1, 0)?, gates, vec!["A".into()], 0, 1.0, 0.0)
    }

    /// One `X` on a single witness qubit; accepts `|0>`.
    pub fn x() -> Result<VerifierCircuit> {
        let g = Gate::new("x", vec![0], gates::x())?;
        VerifierCircuit::new(witness_qubits(1, 0)?, vec![g], vec!["A".into()], 0, 1.0, 0.0)
    }

    /// Copies the witness qubit onto an ancilla output: `Q = |1><1|`.
    pub fn cnot_verifier() -> Result<VerifierCircuit> {
        let g = Gate::new("cnot", vec![0, 1], gates::cnot())?;
        VerifierCircuit::new(witness_qubits(1, 1)?, vec![g], vec!["A".into()], 1, 1.0, 0.0)
    }

    /// Haar-random two-qubit gates on random pairs; the last ancilla is the
    /// output.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        witness: usize,
        ancillas: usize,
        steps: usize,
    ) -> Result<VerifierCircuit> {
        let n = witness + ancillas;
        if n < 2 || ancillas == 0 {
            return Err(Error::InvalidParameter("need at least one ancilla and two sites".into()));
        }
        let gates = (0..steps)
            .map(|t| {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                Gate::new(format!("u{t}"), vec![a, b], random::unitary(rng, 4))
            })
            .collect::<Result<Vec<_>>>()?;
        VerifierCircuit::new(witness_qubits(witness, ancillas)?, gates, vec!["A".into()], n - 1, 1.0, 0.0)
    }
}
