//! One function per subcommand: problem in, report out.

use hamuniv::circuits::{acceptance_gap, acceptance_operator, compile_unitary};
use hamuniv::kitaev::{
    build_kitaev, build_with_default_kappa, check_hmk_lemma, first_order_elements, history_isometry, ClockRep,
    FirstOrderElements, HmkLemmaReport, KitaevHamiltonian,
};
use hamuniv::operators::linalg;
use hamuniv::operators::{eigh, random, DenseOperator, SystemLayout};
use hamuniv::schrieffer_wolff::{sw_report, SwProblem};
use hamuniv::simulation::{
    check_dynamics, check_local_encoding, check_partition_function, verify_simulation_with, DynamicsCheck,
    EigenRow, LocalityReport, PartitionCheck, SimulationReport, SimulationTargets,
};
use hamuniv::universality::{end_to_end, TargetHamiltonian};
use hamuniv::{Constants, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::input::{DemoProblem, KitaevProblem, Problem, SwProblemInput, VerifySimProblem};
use crate::report::{csv, csv_column, fmt_num, Context, Outcome};

/// Residual tolerance for "annihilates" and "unitary" checks.
const EXACT_TOL: f64 = 1e-9;

fn clean(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| if x == 0.0 { 0.0 } else { x }).collect()
}

pub fn run(problem: Problem, ctx: &Context<'_>) -> Result<Outcome> {
    match problem {
        Problem::Spectrum(h) => spectrum(&h, ctx),
        Problem::Compile(c) => compile(&c, ctx),
        Problem::History(p) => history(&p, ctx),
        Problem::HmkCheck(p) => hmk_check(&p, ctx),
        Problem::Sw(p) => sw(p, ctx),
        Problem::VerifySim(p) => verify_sim(&p, ctx),
        Problem::UniversalDemo(p) => universal_demo(&p, ctx),
    }
}

#[derive(Serialize)]
struct SpectrumResult<'a> {
    dim: usize,
    layout: &'a SystemLayout,
    eigenvalues: Vec<f64>,
    norm: f64,
    /// `[start, len]` of each degenerate cluster.
    clusters: Vec<[usize; 2]>,
}

fn spectrum(h: &DenseOperator, ctx: &Context<'_>) -> Result<Outcome> {
    let e = eigh(h)?;
    let eigenvalues = clean(e.values());
    let res = SpectrumResult {
        dim: h.dim(),
        layout: h.layout(),
        clusters: e.clusters().into_iter().map(|r| [r.start, r.len()]).collect(),
        norm: e.norm(),
        eigenvalues,
    };
    let table = csv_column(&res.eigenvalues);
    Ok(ctx.outcome(&res, true, Some(table)))
}

#[derive(Serialize)]
struct CompileResult {
    steps: usize,
    dim: usize,
    witness_dim: usize,
    /// `max |U^dagger U - 1|` of the compiled circuit.
    unitary_deviation: f64,
    completeness: f64,
    soundness: f64,
    acceptance_eigenvalues: Vec<f64>,
    lambda_below_c: Option<f64>,
    acceptance_gap: Option<f64>,
    pass: bool,
}

fn compile(c: &hamuniv::circuits::VerifierCircuit, ctx: &Context<'_>) -> Result<Outcome> {
    let u = compile_unitary(c)?;
    let unitary_deviation =
        linalg::max_abs(linalg::sub_identity(linalg::adj_mul(u.entries(), u.entries()).as_ref()).as_ref());
    let q = acceptance_operator(c)?;
    let gap = acceptance_gap(&q, c.completeness());
    let eig = clean(&gap.eigenvalues);
    let in_range = eig.iter().all(|&v| (-EXACT_TOL..=1.0 + EXACT_TOL).contains(&v));
    let res = CompileResult {
        steps: c.len(),
        dim: u.dim(),
        witness_dim: c.witness_dim(),
        unitary_deviation,
        completeness: c.completeness(),
        soundness: c.soundness(),
        lambda_below_c: gap.lambda_below,
        acceptance_gap: gap.gap,
        pass: unitary_deviation <= EXACT_TOL && in_range,
        acceptance_eigenvalues: eig,
    };
    let table = csv_column(&res.acceptance_eigenvalues);
    Ok(ctx.outcome(&res, res.pass, Some(table)))
}

fn kitaev_of(p: &KitaevProblem) -> Result<KitaevHamiltonian> {
    match p.kappa {
        Some(k) => build_kitaev(&p.circuit, k, p.rep),
        None => build_with_default_kappa(&p.circuit, p.rep),
    }
}

#[derive(Serialize)]
struct HistoryResult {
    rep: ClockRep,
    steps: usize,
    dim: usize,
    witness_dim: usize,
    /// `dim ker H0`, counted at `1e-9 max(1, ||H0||)`.
    ground_dim: usize,
    /// `||H0 V_hist||` over all witnesses.
    history_residual: f64,
    gap_above_ground: Option<f64>,
    gap_times_t3: Option<f64>,
    low_spectrum: Vec<f64>,
    pass: bool,
}

fn history(p: &KitaevProblem, ctx: &Context<'_>) -> Result<Outcome> {
    let kh = kitaev_of(p)?;
    let h0 = kh.h0();
    let e = eigh(&h0)?;
    let tol = EXACT_TOL * e.norm().max(1.0);
    let k = e.values().partition_point(|&v| v <= tol);
    let v = history_isometry(&p.circuit, p.rep)?;
    let history_residual = linalg::spectral_norm(linalg::matmul(h0.entries(), v.as_ref()).as_ref())?;
    let gap = (k > 0 && k < e.dim()).then(|| e.values()[k] - e.values()[k - 1]);
    let steps = p.circuit.len();
    let shown = (2 * k + 2).min(e.dim());
    let res = HistoryResult {
        rep: p.rep,
        steps,
        dim: h0.dim(),
        witness_dim: p.circuit.witness_dim(),
        ground_dim: k,
        history_residual,
        gap_above_ground: gap,
        gap_times_t3: gap.map(|g| g * (steps as f64).powi(3)),
        low_spectrum: clean(&e.values()[..shown]),
        pass: history_residual <= EXACT_TOL && k == p.circuit.witness_dim(),
    };
    let table = csv_column(&res.low_spectrum);
    Ok(ctx.outcome(&res, res.pass, Some(table)))
}

#[derive(Serialize)]
struct HmkResult {
    rep: ClockRep,
    lemma: HmkLemmaReport,
    first_order: FirstOrderElements,
    first_order_ok: bool,
    pass: bool,
}

fn hmk_check(p: &KitaevProblem, ctx: &Context<'_>) -> Result<Outcome> {
    let kh = kitaev_of(p)?;
    let lemma = check_hmk_lemma(&kh, ctx.constants)?;
    let first_order = first_order_elements(&kh)?;
    let first_order_ok = first_order.max_error <= EXACT_TOL;
    let table = csv(
        Some(&["q_eigenvalue", "hmk_eigenvalue", "predicted", "deviation"]),
        lemma.rows.iter().map(|r| {
            vec![fmt_num(r.q_eigenvalue), fmt_num(r.hmk_eigenvalue), fmt_num(r.predicted), fmt_num(r.deviation)]
        }),
    );
    let pass = lemma.pass && first_order_ok;
    let res = HmkResult { rep: p.rep, lemma, first_order, first_order_ok, pass };
    Ok(ctx.outcome(&res, pass, Some(table)))
}

fn sw(p: SwProblemInput, ctx: &Context<'_>) -> Result<Outcome> {
    let e = eigh(&p.h0)?;
    if p.low_dim == 0 || p.low_dim >= e.dim() {
        return Err(hamuniv::Error::InvalidParameter(format!(
            "low_dim = {} must lie in 1..{}",
            p.low_dim,
            e.dim()
        )));
    }
    let low = e.lowest(p.low_dim);
    let prob = SwProblem::new(p.h0, p.h1, p.delta, low)?;
    let rep = sw_report(&prob, p.order, ctx.constants)?;
    let table = csv(
        Some(&["i", "h_eff", "exact"]),
        rep.h_eff_spectrum
            .iter()
            .zip(&rep.perturbed_low_spectrum)
            .enumerate()
            .map(|(i, (a, b))| vec![(i + 1).to_string(), fmt_num(*a), fmt_num(*b)]),
    );
    Ok(ctx.outcome(&rep, rep.pass, Some(table)))
}

fn eigen_csv(rows: &[EigenRow]) -> String {
    csv(
        Some(&["i", "target", "j", "simulator", "difference"]),
        rows.iter().map(|r| {
            vec![r.i.to_string(), fmt_num(r.target), r.j.to_string(), fmt_num(r.simulator), fmt_num(r.difference)]
        }),
    )
}

#[derive(Serialize)]
struct VerifySimResult {
    simulation: SimulationReport,
    partition: Vec<PartitionCheck>,
    dynamics: Vec<DynamicsCheck>,
    locality: Option<LocalityReport>,
    pass: bool,
}

fn verify_sim(p: &VerifySimProblem, ctx: &Context<'_>) -> Result<Outcome> {
    let targets = SimulationTargets { eta: p.eta, epsilon: p.epsilon };
    let simulation = verify_simulation_with(&p.h, &p.h_prime, &p.encoding, p.delta, targets)?;
    let partition = p
        .betas
        .iter()
        .map(|&b| check_partition_function(&p.h, &p.h_prime, &p.encoding, &simulation, b))
        .collect::<Result<Vec<_>>>()?;
    // a random mixed state on the encoded subspace, fixed by the seed
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let support = p.encoding.support_basis()?;
    let rho = random::density_on(&mut rng, support.as_ref(), support.ncols().min(2));
    let rho = DenseOperator::hermitian(p.h_prime.layout().clone(), rho)?;
    let dynamics = p
        .times
        .iter()
        .map(|&t| check_dynamics(&p.h, &p.h_prime, &p.encoding, &rho, t, simulation.epsilon, simulation.eta))
        .collect::<Result<Vec<_>>>()?;
    let locality = match &p.site_map {
        Some(map) => Some(check_local_encoding(&p.encoding, p.h.layout(), map)?),
        None => None,
    };
    let pass = simulation.pass
        && partition.iter().all(|c| c.holds)
        && dynamics.iter().all(|c| c.holds)
        && locality.as_ref().is_none_or(|l| l.local);
    let table = eigen_csv(&simulation.eigen_table);
    let res = VerifySimResult { simulation, partition, dynamics, locality, pass };
    Ok(ctx.outcome(&res, pass, Some(table)))
}

fn universal_demo(p: &DemoProblem, ctx: &Context<'_>) -> Result<Outcome> {
    let target = TargetHamiltonian::new(p.h_target.clone())?;
    let rep = end_to_end(&target, &p.params, ctx.constants)?;
    let table = eigen_csv(&rep.final_certificate.eigen_table);
    Ok(ctx.outcome(&rep, rep.pass, Some(table)))
}

/// Settings that reach the library as [`Constants`].
pub fn constants(overrides: &[(String, f64)], cap: Option<usize>) -> std::result::Result<Constants, String> {
    let mut c = Constants::default();
    for (k, v) in overrides {
        c.set(k, *v)?;
    }
    if let Some(cap) = cap {
        c.dim_cap = cap;
    }
    Ok(c)
}
