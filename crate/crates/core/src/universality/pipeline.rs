use serde::{Deserialize, Serialize};

use super::{
    build_hsim, first_order_sim_check, flag_hamiltonian, qpe_sites, qpe_verifier, verifier_report, witness_family,
    wtilde_encodings, FirstOrderReport, TargetHamiltonian, VerifierReport, WTildeReport,
    WitnessFamily,
};
use crate::circuits::idle_prefix;
use crate::config::Constants;
use crate::error::{Error, Result, StageExt};
use crate::kitaev::{
    build_kitaev, check_hmk_lemma, check_idling_faithfulness, default_kappa, history_isometry,
    history_isometry_over, ClockRep, HmkLemmaReport, IdlingReport,
};
use crate::operators::linalg::{self, c};
use crate::operators::eigh;
use crate::simulation::{compose_simulations, EigenRow, verify_simulation, Encoding, SimulationReport, SimulationTargets};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndToEndParams {
    /// Flag weight in the witnesses.
    pub a: f64,
    /// Readout digits.
    pub m: usize,
    pub tau: Option<f64>,
    pub kappa: Option<f64>,
    /// Identity steps prepended to the verifier.
    pub idle_steps: usize,
    /// Scale of `H_LS - lambda_min` in `H_sim`.
    pub delta: Option<f64>,
    /// Low-energy cut for the certificates against `H_sim`.
    pub delta_prime: Option<f64>,
}

impl Default for EndToEndParams {
    fn default() -> Self {
        EndToEndParams { a: 8.0, m: 1, tau: None, kappa: None, idle_steps: 2, delta: None, delta_prime: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HsimSummary {
    pub dim: usize,
    pub steps: usize,
    pub kappa: f64,
    pub delta: f64,
    pub lambda_min: f64,
    /// Gap of `H_LS` above its accepting ground space.
    pub ls_gap: f64,
    /// Place-value unit of the flag terms, `(a^2 + 1) * unit`.
    pub flag_weight: f64,
    pub flag_sites: Vec<usize>,
    pub low_eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalCertificate {
    pub delta_prime: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub eigen_table: Vec<EigenRow>,
    /// `eta` of the `H' -> H_sim` step plus `||W - W~||`.
    pub sum_style_eta: f64,
    pub sum_style_epsilon: f64,
    pub eigenvalues_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub params: EndToEndParams,
    pub family: WitnessFamily,
    pub verifier: VerifierReport,
    pub idling: IdlingReport,
    pub hmk: HmkLemmaReport,
    pub hsim: HsimSummary,
    pub first_order: FirstOrderReport,
    pub wtilde: WTildeReport,
    /// `H_sim` simulating the witness-space operator, seen through `W~`.
    pub hprime_to_hsim: SimulationReport,
    /// `H_sim` simulating `H_target` through the composed local encoding.
    pub composite: SimulationReport,
    #[serde(rename = "final")]
    pub final_certificate: FinalCertificate,
    pub pass: bool,
}

/// Runs the chain from the verifier to the composite certificate.
pub fn end_to_end(target: &TargetHamiltonian, params: &EndToEndParams, constants: &Constants) -> Result<PipelineReport> {
    let fam = witness_family(target, params.a, params.m, params.tau).stage("witness_family")?;
    let circuit = qpe_verifier(target, &fam).stage("verifier")?;
    let verifier = verifier_report(&circuit, &fam).stage("verifier")?;
    let d = target.dim();
    if verifier.top_multiplicity != d {
        return Err(Error::Precondition(format!(
            "accepting space has dimension {}, expected {d}",
            verifier.top_multiplicity
        )))
        .stage("verifier");
    }

    let l = params.idle_steps;
    let idled = idle_prefix(&circuit, l);
    let steps = idled.len();
    let g = verifier.acceptance_gap.unwrap_or(circuit.completeness());
    let kappa = params.kappa.unwrap_or_else(|| default_kappa(g, steps));
    let idling = check_idling_faithfulness(&circuit, l, kappa, circuit.completeness()).stage("idling")?;

    let rep = ClockRep::ClockSubspace;
    let kh = build_kitaev(&idled, kappa, rep).stage("kitaev")?;
    let hmk = check_hmk_lemma(&kh, constants).stage("kitaev")?;
    let h_ls = kh.h_mk();
    let e_ls = eigh(&h_ls).stage("kitaev")?;
    let lambda_min = e_ls.min();
    let ls_gap = e_ls.values()[d] - lambda_min;

    let n_sites = target.h().layout().num_sites();
    let sites = qpe_sites(n_sites, fam.m);
    let flag_sites: Vec<usize> = sites.a_prime.clone().collect();
    let one = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
    let flags = (0..fam.m).map(|_| flag_hamiltonian(&one)).collect::<Result<Vec<_>>>().stage("hsim")?;
    let flag_weight = (fam.a * fam.a + 1.0) * fam.unit;
    let top = ((1usize << fam.m) - 1) as f64 * fam.unit;
    let delta = params
        .delta
        .unwrap_or(100.0 * (fam.a * fam.a + 1.0) * top.max(fam.unit).powi(2) / ls_gap);
    if delta <= target.norm() {
        return Err(Error::InvalidParameter(format!("Delta = {delta} must exceed ||H_target|| = {}", target.norm())))
            .stage("hsim");
    }
    let h1 = build_hsim(&h_ls, lambda_min, &flags, &flag_sites, 0.0, flag_weight).stage("hsim")?.shift(-fam.shift);
    let h_sim = build_hsim(&h_ls, lambda_min, &flags, &flag_sites, delta, flag_weight)
        .stage("hsim")?
        .shift(-fam.shift);
    let e_sim = eigh(&h_sim).stage("hsim")?;
    let hsim = HsimSummary {
        dim: h_sim.dim(),
        steps,
        kappa,
        delta,
        lambda_min,
        ls_gap,
        flag_weight,
        flag_sites: flag_sites.clone(),
        low_eigenvalues: e_sim.values()[..(d + 1).min(e_sim.dim())].to_vec(),
    };

    // H_sim = (Delta g) H0 + H1 with H0 = (H_LS - lambda_min) / g
    let h0 = h_ls.shift(-lambda_min).scale(1.0 / ls_gap);
    let hist = history_isometry(&idled, rep).stage("first_order")?;
    let phi_map = linalg::mul_adj(fam.phi.as_ref(), fam.psi.as_ref());
    let u = linalg::matmul(hist.as_ref(), phi_map.as_ref());
    let compressed = linalg::adj_mul(u.as_ref(), linalg::matmul(h1.entries(), u.as_ref()).as_ref());
    let requirement = linalg::spectral_norm(linalg::sub(target.h().entries(), compressed.as_ref()).as_ref())
        .stage("first_order")?;
    let first_order = first_order_sim_check(
        &h0,
        &h1,
        delta * ls_gap,
        &u,
        target.h(),
        2.0 * requirement + 1e-12,
        constants.c_first_order,
    )
    .stage("first_order")?;

    let wtilde = wtilde_encodings(target, &fam).stage("wtilde")?;

    let delta_prime = params.delta_prime.unwrap_or(target.eigen().max().max(0.0) + 1.0);
    let v_idle = history_isometry_over(&idled, rep, 0..=l).stage("encoding")?;
    let enc_c = Encoding::isometry(kh.layout().clone(), d, linalg::matmul(v_idle.as_ref(), wtilde.w_tilde.as_ref()))
        .stage("encoding")?;
    let hprime_to_hsim = verify_simulation(target.h(), &h_sim, &enc_c, delta_prime).stage("hprime_to_hsim")?;
    let enc_ab = Encoding::isometry(fam.layout.clone(), d, wtilde.w.clone()).stage("encoding")?;
    let enc_bc = Encoding::isometry(kh.layout().clone(), fam.w.nrows(), v_idle).stage("encoding")?;
    let composite =
        compose_simulations(target.h(), &h_sim, &enc_ab, &enc_bc, delta_prime, SimulationTargets::default())
            .stage("composite")?;

    let final_certificate = FinalCertificate {
        delta_prime,
        eta: composite.eta,
        epsilon: composite.epsilon,
        eigen_table: composite.eigen_table.clone(),
        sum_style_eta: wtilde.simulation.eta + hprime_to_hsim.eta,
        sum_style_epsilon: wtilde.simulation.epsilon + hprime_to_hsim.epsilon,
        eigenvalues_match: composite.max_eigen_difference <= composite.epsilon + 1e-9,
    };
    let pass = verifier.pass
        && idling.pass
        && hmk.pass
        && first_order.pass
        && hprime_to_hsim.pass
        && composite.pass
        && final_certificate.eigenvalues_match;
    Ok(PipelineReport {
        params: params.clone(),
        family: fam,
        verifier,
        idling,
        hmk,
        hsim,
        first_order,
        wtilde,
        hprime_to_hsim,
        composite,
        final_certificate,
        pass,
    })
}
