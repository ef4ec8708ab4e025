use hamuniv::circuits::{
    acceptance_gap, acceptance_operator, compile_unitary, gates, idle_prefix, library, Gate, VerifierCircuit,
    IDENTITY_LABEL,
};
use hamuniv::operators::linalg::{self, re};
use hamuniv::operators::{eigh, random, tensor_embed, DenseOperator, Register, RegisterRole, SystemLayout};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ry(theta: f64) -> linalg::CMat {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    faer::Mat::from_fn(2, 2, |i, j| re([[c, -s], [s, c]][i][j]))
}

/// Born probability of reading `|1>` on the output after evolving `psi (x) |0...0>`.
fn born(circuit: &VerifierCircuit, psi: &[hamuniv::operators::c64]) -> f64 {
    let u = compile_unitary(circuit).unwrap();
    let layout = circuit.layout();
    // witness sites come first in every library circuit
    let mut v = vec![re(0.0); layout.total_dim()];
    v[..psi.len()].copy_from_slice(psi);
    let out = u.apply(&v);
    out.iter()
        .enumerate()
        .filter(|(i, _)| layout.digit(*i, circuit.output_site()) == 1)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

#[test]
fn empty_and_cancelling_circuits() {
    let c = library::x().unwrap();
    let empty = c.with_gates(vec![]).unwrap();
    let u = compile_unitary(&empty).unwrap();
    assert_eq!(linalg::max_abs(linalg::sub_identity(u.entries()).as_ref()), 0.0);
    let x = Gate::new("x", vec![0], gates::x()).unwrap();
    let xx = c.with_gates(vec![x.clone(), x]).unwrap();
    let u = compile_unitary(&xx).unwrap();
    assert!(linalg::max_abs(linalg::sub_identity(u.entries()).as_ref()) < 1e-15);
}

#[test]
fn compile_matches_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let c = library::random(&mut rng, 2, 1, 3).unwrap();
    let u = compile_unitary(&c).unwrap();
    let mut want = DenseOperator::identity(c.layout().clone());
    for g in c.gates() {
        let local = DenseOperator::new(SystemLayout::uniform(g.targets().len(), 2).unwrap(), g.unitary().clone()).unwrap();
        let e = tensor_embed(&local, g.targets(), c.layout()).unwrap();
        want = &e * &want;
    }
    assert!(u.distance(&want) < 1e-12);
}

#[test]
fn lone_ancilla_hadamard_accepts_half() {
    let layout = SystemLayout::uniform(1, 2).unwrap();
    let g = Gate::new("h", vec![0], gates::hadamard()).unwrap();
    let c = VerifierCircuit::new(layout, vec![g], vec![], 0, 1.0, 0.0).unwrap();
    let q = acceptance_operator(&c).unwrap();
    assert_eq!(q.q.dim(), 1);
    assert!((q.q.get(0, 0).re - 0.5).abs() < 1e-15);
}

#[test]
fn cnot_verifier_projects_on_one() {
    let q = acceptance_operator(&library::cnot_verifier().unwrap()).unwrap();
    let want = DenseOperator::from_real_diagonal(q.q.layout().clone(), &[0.0, 1.0]).unwrap();
    assert!(q.q.distance(&want) < 1e-15);
}

#[test]
fn acceptance_matches_statevector() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = library::random(&mut rng, 2, 1, 4).unwrap();
    let q = acceptance_operator(&c).unwrap();
    for _ in 0..20 {
        let psi = random::state(&mut rng, 4);
        assert!((q.q.expectation(&psi).re - born(&c, &psi)).abs() < 1e-10);
    }
    let v = q.eigen.values();
    assert!(v[0] >= -1e-9 && v[v.len() - 1] <= 1.0 + 1e-9);
}

#[test]
fn gaps() {
    let c = library::cnot_verifier().unwrap();
    let mut q = acceptance_operator(&c).unwrap();
    assert_eq!(acceptance_gap(&q, 1.0).gap, Some(1.0));
    let l = SystemLayout::uniform(1, 2).unwrap();
    q.eigen = eigh(&DenseOperator::identity(l.clone())).unwrap();
    let g = acceptance_gap(&q, 1.0);
    assert!(!g.is_gapped());
    assert_eq!(g.eigenvalues.len(), 2);
    q.eigen = eigh(&DenseOperator::from_real_diagonal(l, &[1.0, 0.5]).unwrap()).unwrap();
    assert_eq!(acceptance_gap(&q, 1.0).gap, Some(0.5));
}

#[test]
fn rejecting_circuit_gap_exceeds_promise() {
    // output ancilla rotated to accept with probability 0.3 for every witness
    let layout = SystemLayout::with_registers(
        vec![2, 2],
        vec![Register::new("A", RegisterRole::Witness, 0, 1), Register::new("out", RegisterRole::Output, 1, 1)],
        1 << 16,
    )
    .unwrap();
    let theta = 2.0 * 0.3f64.sqrt().asin();
    let g = Gate::new("ry", vec![1], ry(theta)).unwrap();
    let (c, s) = (0.9, 0.4);
    let circuit = VerifierCircuit::new(layout, vec![g], vec!["A".into()], 1, c, s).unwrap();
    let q = acceptance_operator(&circuit).unwrap();
    let gap = acceptance_gap(&q, c).gap.unwrap();
    assert!((gap - 0.6).abs() < 1e-12);
    assert!(gap >= c - s);
}

#[test]
fn idling_prepends_identities() {
    let c = library::cnot_verifier().unwrap();
    let same = idle_prefix(&c, 0);
    assert_eq!(same.len(), c.len());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = library::random(&mut rng, 1, 1, 2).unwrap();
    let idled = idle_prefix(&r, 3);
    assert_eq!(idled.len(), 5);
    assert!(idled.gates()[..3].iter().all(|g| g.label() == IDENTITY_LABEL));
    let a = compile_unitary(&r).unwrap();
    let b = compile_unitary(&idled).unwrap();
    assert!(a.distance(&b) < 1e-15);
}

#[test]
fn invalid_circuits_are_rejected() {
    let bad = faer::Mat::from_fn(2, 2, |i, j| re((i + j) as f64));
    assert!(Gate::new("bad", vec![0], bad).is_err());
    assert!(Gate::new("dup", vec![0, 0], gates::cnot()).is_err());
    let l = SystemLayout::uniform(1, 2).unwrap();
    assert!(VerifierCircuit::new(l.clone(), vec![], vec![], 0, 0.5, 0.5).is_err());
    assert!(VerifierCircuit::new(l.clone(), vec![], vec![], 3, 1.0, 0.0).is_err());
    assert!(VerifierCircuit::new(l, vec![], vec!["nope".into()], 0, 1.0, 0.0).is_err());
}

#[test]
fn circuit_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let c = library::random(&mut rng, 1, 2, 3).unwrap();
    let text = serde_json::to_string(&c).unwrap();
    let back: VerifierCircuit = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    assert!(compile_unitary(&back).unwrap().distance(&compile_unitary(&c).unwrap()) == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn idling_keeps_acceptance(seed in any::<u64>(), l in 0usize..5, steps in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = library::random(&mut rng, 1, 2, steps).unwrap();
        let a = acceptance_operator(&c).unwrap();
        let b = acceptance_operator(&idle_prefix(&c, l)).unwrap();
        prop_assert!(a.q.distance(&b.q) <= 1e-12);
    }

    #[test]
    fn acceptance_spectrum_in_unit_interval(seed in any::<u64>(), steps in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = library::random(&mut rng, 2, 1, steps).unwrap();
        let q = acceptance_operator(&c).unwrap();
        prop_assert!(q.eigen.min() >= -1e-9 && q.eigen.max() <= 1.0 + 1e-9);
    }
}
