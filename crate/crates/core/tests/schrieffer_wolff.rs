use hamuniv::circuits::library;
use hamuniv::kitaev::{build_with_default_kappa, check_hmk_lemma, ClockRep};
use hamuniv::operators::linalg::{self, re};
use hamuniv::operators::{eigvalsh, random, DenseOperator, Subspace, SystemLayout};
use hamuniv::schrieffer_wolff::{sw_bounds, sw_exact, sw_report, sw_series, SwProblem};
use hamuniv::{Constants, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn qubit() -> SystemLayout {
    SystemLayout::uniform(1, 2).unwrap()
}

fn e0(l: &SystemLayout) -> Subspace {
    let n = l.total_dim();
    Subspace::from_vectors(l.clone(), &[(0..n).map(|i| re((i == 0) as u8 as f64)).collect()]).unwrap()
}

fn two_level(v: f64, delta: f64) -> SwProblem {
    let l = qubit();
    let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 1.0]).unwrap();
    let h1 = DenseOperator::from_fn(l.clone(), |i, j| re(if i != j { v } else { 0.0 })).with_hermitian_flag(true).unwrap();
    SwProblem::new(h0, h1, delta, e0(&l)).unwrap()
}

/// `H0` with `k` low eigenvalues in `[0, 0.3]` and the rest in `[1, 2]`, in a
/// random basis; `H1` random with `||H1|| = r delta`.
fn random_problem(rng: &mut ChaCha8Rng, n: usize, k: usize, delta: f64, r: f64) -> SwProblem {
    let l = SystemLayout::uniform(1, n).unwrap();
    let u = random::unitary(rng, n);
    let d: Vec<f64> = (0..n).map(|i| if i < k { rng.gen_range(0.0..0.3) } else { rng.gen_range(1.0..2.0) }).collect();
    let h0 = DenseOperator::from_real_diagonal(l.clone(), &d).unwrap().conjugate_by(u.as_ref(), l.clone()).unwrap();
    let h0 = h0.hermitian_part();
    let low = Subspace::from_orthonormal(l.clone(), faer::Mat::from_fn(n, k, |i, j| u[(i, j)])).unwrap();
    let h1 = random::hermitian(rng, l, r * delta);
    SwProblem::new(h0, h1, delta, low).unwrap()
}

#[test]
fn zero_perturbation_is_trivial() {
    let l = qubit();
    let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.2, 1.0]).unwrap();
    let p = SwProblem::new(h0, DenseOperator::zeros(l.clone()).with_hermitian_flag(true).unwrap(), 3.0, e0(&l)).unwrap();
    let x = sw_exact(&p).unwrap();
    assert!(x.s_norm < 1e-14);
    assert!((x.h_eff[(0, 0)].re - 0.6).abs() < 1e-14);
    let b = sw_bounds(&p, 1, &Constants::default()).unwrap();
    assert!(b.s_bound == 0.0 && b.truncation_bound == 0.0 && b.truncation_measured < 1e-14);
}

#[test]
fn two_level_closed_form() {
    for (v, delta) in [(0.1, 1.0), (0.3, 2.0), (0.01, 5.0)] {
        let x = sw_exact(&two_level(v, delta)).unwrap();
        let want = (delta - (delta * delta + 4.0 * v * v).sqrt()) / 2.0;
        assert!((x.h_eff[(0, 0)].re - want).abs() < 1e-12, "v {v} delta {delta}");
        assert!(x.block_residual < 1e-12 && x.projector_residual < 1e-12);
        assert!(x.s_norm < std::f64::consts::FRAC_PI_2 && x.diagonal_block_norm < 1e-10);
    }
}

#[test]
fn block_diagonal_perturbation_needs_no_rotation() {
    let l = SystemLayout::uniform(1, 3).unwrap();
    let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 1.0, 1.5]).unwrap();
    let h1 = DenseOperator::from_fn(l.clone(), |i, j| match (i, j) {
        (0, 0) => re(0.05),
        (1, 2) | (2, 1) => re(0.1),
        _ => re(0.0),
    })
    .with_hermitian_flag(true)
    .unwrap();
    let p = SwProblem::new(h0, h1, 2.0, e0(&l)).unwrap();
    let x = sw_exact(&p).unwrap();
    assert!(x.s_norm < 1e-12);
    assert!((x.h_eff[(0, 0)].re - 0.05).abs() < 1e-12);
}

#[test]
fn series_terms() {
    let p = two_level(0.2, 1.0);
    let s = sw_series(&p, 1).unwrap();
    assert_eq!(s.len(), 2);
    assert!(s[0][(0, 0)].norm() < 1e-15 && s[1][(0, 0)].norm() < 1e-15);
    assert!(matches!(sw_series(&p, 2), Err(Error::InvalidParameter(_))));

    let l = SystemLayout::uniform(1, 3).unwrap();
    let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 0.0, 1.0]).unwrap();
    let h1 = DenseOperator::from_real_diagonal(l.clone(), &[0.1, -0.2, 0.3]).unwrap();
    let low = Subspace::span(l.clone(), linalg::identity(3).as_ref().subcols(0, 2), 1e-12).unwrap();
    let s = sw_series(&SwProblem::new(h0, h1, 2.0, low).unwrap(), 1).unwrap();
    assert!((s[1][(0, 0)].re - 0.1).abs() < 1e-15 && (s[1][(1, 1)].re + 0.2).abs() < 1e-15);
    assert!(s[1][(0, 1)].norm() < 1e-15);
}

#[test]
fn preconditions() {
    let l = qubit();
    let h0 = DenseOperator::from_real_diagonal(l.clone(), &[0.0, 1.0]).unwrap();
    let big = DenseOperator::from_fn(l.clone(), |i, j| re(if i != j { 0.6 } else { 0.0 })).with_hermitian_flag(true).unwrap();
    assert!(matches!(SwProblem::new(h0.clone(), big, 1.0, e0(&l)), Err(Error::Precondition(_))));
    let mixed = DenseOperator::from_fn(l.clone(), |_, _| re(0.5)).with_hermitian_flag(true).unwrap();
    let zero = DenseOperator::zeros(l.clone()).with_hermitian_flag(true).unwrap();
    assert!(matches!(SwProblem::new(mixed, zero, 1.0, e0(&l)), Err(Error::Precondition(_))));
}

#[test]
fn two_level_truncation_tracks_v_squared() {
    let delta = 1.0;
    let c = Constants::default();
    let mut pts = Vec::new();
    for k in 0..5 {
        let v = 0.05 / 2f64.powi(k);
        let b = sw_bounds(&two_level(v, delta), 1, &c).unwrap();
        assert!(b.truncation_ok && b.s_ok);
        let rel = (b.truncation_measured - v * v / delta).abs() / (v * v / delta);
        assert!(rel < 4.0 * v * v, "v {v}: {rel}");
        pts.push((v.ln(), b.truncation_measured.ln()));
    }
    let slope = fit_slope(&pts);
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn kitaev_low_space_within_sin_theta_bound() {
    for c in [library::cnot_verifier().unwrap(), library::x().unwrap()] {
        let kh = build_with_default_kappa(&c, ClockRep::ClockSubspace).unwrap();
        let r = check_hmk_lemma(&kh, &Constants::default()).unwrap();
        assert!(r.sin_theta_ok, "{} > {}", r.sin_theta_distance, r.sin_theta_bound);
    }
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_truncation_within_bound(seed in any::<u64>(), n in 2usize..=16, r in 0.001f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..n);
        let p = random_problem(&mut rng, n, k, 10.0, r);
        let rep = sw_report(&p, 1, &Constants::default()).unwrap();
        prop_assert!(rep.bounds.truncation_ok, "{:?}", rep.bounds);
        prop_assert!(rep.pass);
        // the effective block is unitarily equivalent to the low spectrum
        let low = eigvalsh(&p.perturbed()).unwrap();
        for (a, b) in rep.h_eff_spectrum.iter().zip(&low) {
            prop_assert!((a - b).abs() < 1e-9 * 10.0);
        }
    }
}
