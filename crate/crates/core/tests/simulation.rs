use hamuniv::circuits::{idle_prefix, library};
use hamuniv::kitaev::{history_isometry_over, ClockRep};
use hamuniv::operators::linalg::{self, c, re, CMat};
use hamuniv::operators::{eigvalsh, random, DenseOperator, SystemLayout};
use hamuniv::simulation::instances::{block_instance, BlockInstance};
use hamuniv::simulation::{
    apply_encoding, check_dynamics, check_local_encoding, check_partition_function, compose_simulations,
    verify_simulation, verify_simulation_with, Encoding, SimulationTargets,
};
use hamuniv::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(n: usize, k: usize) -> CMat {
    faer::Mat::from_fn(n, n, |i, j| re((i == k && j == k) as u8 as f64))
}

fn norm(a: faer::MatRef<'_, hamuniv::operators::c64>) -> f64 {
    linalg::spectral_norm(a).unwrap()
}

fn instance(seed: u64, conjugated: bool, s: f64) -> BlockInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    block_instance(&mut rng, 2, 3, conjugated, 4.0, s).unwrap()
}

#[test]
fn encoding_of_basic_maps() {
    let l = SystemLayout::uniform(1, 2).unwrap();
    let m = DenseOperator::from_fn(l.clone(), |i, j| c((i + 2 * j) as f64, (i as f64) - (j as f64)));
    let id = Encoding::identity(l.clone());
    assert_eq!(apply_encoding(&id, &m).unwrap().distance(&m), 0.0);

    // V = 1 and P = 1 (x) |0><0| on a two-level ancilla: M (x) |0><0|
    let big = SystemLayout::uniform(2, 2).unwrap();
    let enc = Encoding::new(big.clone(), 2, linalg::identity(4), unit(2, 0), linalg::zeros(2, 2)).unwrap();
    let out = apply_encoding(&enc, &m).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = if i < 2 && j < 2 { m.get(i, j) } else { re(0.0) };
            assert_eq!(out.get(i, j), want);
        }
    }

    // real M: the Q branch adds a second copy, same as P of rank p + q
    let r = DenseOperator::from_fn(l.clone(), |i, j| re(1.0 + (i * j) as f64)).with_hermitian_flag(true).unwrap();
    let split = Encoding::new(big.clone(), 2, linalg::identity(4), unit(2, 0), unit(2, 1)).unwrap();
    let whole = Encoding::new(big, 2, linalg::identity(4), linalg::identity(2), linalg::zeros(2, 2)).unwrap();
    let a = apply_encoding(&split, &r).unwrap();
    let b = apply_encoding(&whole, &r).unwrap();
    assert!(a.distance(&b) < 1e-15);
    assert_eq!(split.encoded_dim(), 4);

    // complex M: the Q branch carries the conjugate
    let a = apply_encoding(&split, &m).unwrap();
    assert_eq!(a.get(2, 3), m.get(0, 1).conj());
}

#[test]
fn encoding_validation() {
    let l = SystemLayout::uniform(1, 2).unwrap();
    let not_iso = faer::Mat::from_fn(2, 2, |_, _| re(1.0));
    assert!(matches!(Encoding::isometry(l.clone(), 2, not_iso), Err(Error::NotOrthonormal { .. })));
    let overlap = Encoding::new(l.clone(), 1, linalg::identity(2), unit(2, 0), unit(2, 0));
    assert!(overlap.is_err());
    assert!(Encoding::isometry(l, 3, linalg::identity(2)).is_err());
}

#[test]
fn locality_of_simple_encodings() {
    let two = SystemLayout::uniform(2, 2).unwrap();
    let r = check_local_encoding(&Encoding::identity(two.clone()), &two, &[vec![0], vec![1]]).unwrap();
    assert!(r.local && r.max_residual < 1e-12);

    let swap = faer::Mat::from_fn(4, 4, |i, j| re((i == ((j & 1) << 1 | j >> 1)) as u8 as f64));
    let enc = Encoding::isometry(two.clone(), 4, swap).unwrap();
    let r = check_local_encoding(&enc, &two, &[vec![1], vec![0]]).unwrap();
    assert!(r.local && r.max_residual < 1e-12);
    let r = check_local_encoding(&enc, &two, &[vec![0], vec![1]]).unwrap();
    assert!(!r.local && r.max_residual > 0.5);
}

#[test]
fn idling_history_encoding_is_local() {
    let c = idle_prefix(&library::cnot_verifier().unwrap(), 2);
    let v = history_isometry_over(&c, ClockRep::ClockSubspace, 0..=2).unwrap();
    let kl = hamuniv::kitaev::kitaev_layout(&c, ClockRep::ClockSubspace).unwrap();
    let enc = Encoding::isometry(kl.clone(), 2, v).unwrap();
    let target = SystemLayout::uniform(1, 2).unwrap();
    let r = check_local_encoding(&enc, &target, &[vec![0]]).unwrap();
    assert!(r.local && r.max_residual < 1e-10, "{}", r.max_residual);

    // the full history state runs the CNOT, so site 0 alone no longer works
    let full = history_isometry_over(&c, ClockRep::ClockSubspace, 0..=3).unwrap();
    let enc = Encoding::isometry(kl, 2, full).unwrap();
    assert!(!check_local_encoding(&enc, &target, &[vec![0]]).unwrap().local);
}

#[test]
fn identity_and_exact_block_simulations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l = SystemLayout::uniform(2, 2).unwrap();
    let h = random::hermitian(&mut rng, l.clone(), 1.0);
    let r = verify_simulation(&h, &h, &Encoding::identity(l), 2.0).unwrap();
    assert!(r.eta < 1e-9 && r.epsilon < 1e-9 && r.pass);

    for conj in [false, true] {
        let x = instance(11, conj, 0.0);
        let r = verify_simulation(&x.h, &x.hp, &x.encoding, x.delta).unwrap();
        assert!(r.eta < 1e-9 && r.epsilon < 1e-9, "eta {} eps {}", r.eta, r.epsilon);
        assert!(r.pass && r.max_eigen_difference < 1e-9);
        assert_eq!(r.eigen_table.len(), x.encoding.encoded_dim());
    }
}

#[test]
fn rotated_block_matches_direct_construction() {
    for seed in 0..5 {
        let x = instance(seed, seed % 2 == 1, 0.05);
        let r = verify_simulation(&x.h, &x.hp, &x.encoding, x.delta).unwrap();
        // the direct rotation is the closest unitary carrying one subspace to
        // the other, so it moves V no further than U does
        let u_minus_1 = norm(linalg::sub_identity(x.rotation.as_ref()).as_ref());
        assert!(r.eta <= u_minus_1 + 1e-12, "eta {} vs {}", r.eta, u_minus_1);
        assert!(r.eta > 0.0);

        // epsilon in the full space from an independent eigendecomposition
        let (vals, vecs) = linalg::hermitian_eig(x.hp.entries()).unwrap();
        let k = x.encoding.encoded_dim();
        let low = linalg::spectral_function(&vals[..k], vecs.as_ref().subcols(0, k), re);
        let x_op = x.encoding.ancilla_operator(x.h.entries());
        let enc_h = linalg::mul_adj(linalg::matmul(r.v_tilde.as_ref(), x_op.as_ref()).as_ref(), r.v_tilde.as_ref());
        let eps = norm(linalg::sub(low.as_ref(), enc_h.as_ref()).as_ref());
        assert!((eps - r.epsilon).abs() < 1e-10, "{eps} vs {}", r.epsilon);
        // spectra are untouched by the rotation
        assert!(r.max_eigen_difference < 1e-9 && r.eigen_transfer);

        let t = SimulationTargets { eta: Some(u_minus_1), epsilon: Some(r.epsilon * 1.01 + 1e-12) };
        assert!(verify_simulation_with(&x.h, &x.hp, &x.encoding, x.delta, t).unwrap().pass);
        let tight = SimulationTargets { eta: Some(r.eta / 2.0), epsilon: None };
        assert!(!verify_simulation_with(&x.h, &x.hp, &x.encoding, x.delta, tight).unwrap().condition_i);
    }
}

#[test]
fn wrong_low_energy_count_is_reported() {
    let x = instance(2, false, 0.0);
    let err = verify_simulation(&x.h, &x.hp, &x.encoding, 3.0 * x.delta).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch(_)));
}

#[test]
fn partition_function_bounds() {
    // pad at 1e3: the excited block is invisible at beta = 1
    let l = SystemLayout::uniform(1, 2).unwrap();
    let h = DenseOperator::from_real_diagonal(l, &[0.0, 0.5]).unwrap();
    let big = SystemLayout::uniform(2, 2).unwrap();
    let hp = DenseOperator::from_real_diagonal(big.clone(), &[0.0, 0.5, 1e3, 1e3]).unwrap();
    let v = faer::Mat::from_fn(4, 2, |i, j| re((i == j) as u8 as f64));
    let enc = Encoding::isometry(big, 2, v).unwrap();
    let r = verify_simulation(&h, &hp, &enc, 10.0).unwrap();
    let p = check_partition_function(&h, &hp, &enc, &r, 1.0).unwrap();
    assert!(p.relative_error < 1e-300 && p.holds);

    // beta = 0 counts states
    let p = check_partition_function(&h, &hp, &enc, &r, 0.0).unwrap();
    assert!((p.relative_error - 1.0).abs() < 1e-12 && p.holds);
    assert!(check_partition_function(&h, &hp, &enc, &r, -1.0).is_err());

    for seed in 0..4 {
        let x = instance(100 + seed, seed % 2 == 0, 0.02);
        let r = verify_simulation(&x.h, &x.hp, &x.encoding, x.delta).unwrap();
        for beta in [0.0, 0.1, 1.0, 10.0] {
            let p = check_partition_function(&x.h, &x.hp, &x.encoding, &r, beta).unwrap();
            assert!(p.holds, "seed {seed} beta {beta}: {} > {}", p.relative_error, p.bound);
        }
    }
}

#[test]
fn dynamics_bounds() {
    for seed in 0..4 {
        let x = instance(200 + seed, seed % 2 == 1, 0.02);
        let r = verify_simulation(&x.h, &x.hp, &x.encoding, x.delta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let support = x.encoding.support_basis().unwrap();
        let rho = DenseOperator::hermitian(x.hp.layout().clone(), random::density_on(&mut rng, support.as_ref(), 2))
            .unwrap();
        let d0 = check_dynamics(&x.h, &x.hp, &x.encoding, &rho, 0.0, r.epsilon, r.eta).unwrap();
        assert!(d0.trace_distance < 1e-12);
        for t in [0.5, 2.0] {
            let d = check_dynamics(&x.h, &x.hp, &x.encoding, &rho, t, r.epsilon, r.eta).unwrap();
            assert!(d.holds, "seed {seed} t {t}: {} > {}", d.trace_distance, d.bound);
        }
    }
    // exact instance: evolutions agree
    let x = instance(7, false, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let support = x.encoding.support_basis().unwrap();
    let rho = DenseOperator::hermitian(x.hp.layout().clone(), random::density_on(&mut rng, support.as_ref(), 1)).unwrap();
    let d = check_dynamics(&x.h, &x.hp, &x.encoding, &rho, 2.0, 0.0, 0.0).unwrap();
    assert!(d.trace_distance < 1e-9 && d.holds);

    // a state leaking out of the encoded subspace is refused
    let leak = DenseOperator::from_real_diagonal(x.hp.layout().clone(), &{
        let mut d = vec![0.0; x.hp.dim()];
        d[x.hp.dim() - 1] = 1.0;
        d
    })
    .unwrap();
    assert!(matches!(check_dynamics(&x.h, &x.hp, &x.encoding, &leak, 1.0, 0.0, 0.0), Err(Error::Precondition(_))));
}

#[test]
fn composition() {
    let l = SystemLayout::uniform(1, 2).unwrap();
    let h = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 0.5]).unwrap();
    let id = Encoding::identity(l);
    let r = compose_simulations(&h, &h, &id, &id, 1.0, SimulationTargets::default()).unwrap();
    assert!(r.eta < 1e-14 && r.epsilon < 1e-14);

    // H -> H (+) 3 on two qubits -> that (+) 3 on three qubits
    let b = SystemLayout::uniform(2, 2).unwrap();
    let hb = DenseOperator::from_real_diagonal(b.clone(), &[0.0, 0.5, 3.0, 3.0]).unwrap();
    let vb = faer::Mat::from_fn(4, 2, |i, j| re((i == j) as u8 as f64));
    let ab = Encoding::isometry(b, 2, vb).unwrap();
    assert!(verify_simulation(&h, &hb, &ab, 1.0).unwrap().pass);
    let c3 = SystemLayout::uniform(3, 2).unwrap();
    let hc = DenseOperator::from_real_diagonal(c3.clone(), &[0.0, 0.5, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0]).unwrap();
    let vc = faer::Mat::from_fn(8, 4, |i, j| re((i == j) as u8 as f64));
    let bc = Encoding::isometry(c3, 4, vc).unwrap();
    let r = compose_simulations(&h, &hc, &ab, &bc, 1.0, SimulationTargets::default()).unwrap();
    assert!(r.eta < 1e-14 && r.epsilon < 1e-14 && r.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn encoded_spectrum_repeats_target(seed in any::<u64>(), conj in any::<bool>()) {
        let x = instance(seed, conj, 0.0);
        let eh = apply_encoding(&x.encoding, &x.h).unwrap();
        let mut want: Vec<f64> = eigvalsh(&x.h).unwrap().into_iter().flat_map(|v| std::iter::repeat(v).take(1 + conj as usize)).collect();
        want.resize(eh.dim(), 0.0);
        want.sort_by(f64::total_cmp);
        let got = eigvalsh(&eh).unwrap();
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn certified_instances_transfer_eigenvalues(seed in any::<u64>(), s in 0.0f64..0.1) {
        let x = instance(seed, seed % 2 == 0, s);
        let r = verify_simulation(&x.h, &x.hp, &x.encoding, x.delta).unwrap();
        prop_assert!(r.eigen_transfer);
        prop_assert!(r.eta <= norm(linalg::sub_identity(x.rotation.as_ref()).as_ref()) + 1e-12);
        if s == 0.0 {
            prop_assert!(r.eta < 1e-9 && r.epsilon < 1e-9);
        }
    }
}
