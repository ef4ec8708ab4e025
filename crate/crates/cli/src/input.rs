//! Reading problem files: JSON syntax, schema, then semantic checks.

use std::fmt;
use std::path::Path;

use hamuniv::circuits::{CircuitJson, VerifierCircuit};
use hamuniv::kitaev::ClockRep;
use hamuniv::operators::{matrix_from_rows, DenseOperator, OperatorJson};
use hamuniv::simulation::Encoding;
use hamuniv::Error;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::Command;

/// One problem with a problem file: where and what.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Diagnostic { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

pub type Diagnostics = Vec<Diagnostic>;

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KitaevInput {
    circuit: CircuitJson,
    #[serde(default)]
    rep: ClockRep,
    kappa: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SwInput {
    h0: OperatorJson,
    h1: OperatorJson,
    delta: f64,
    /// Number of lowest eigenvectors of `h0` spanning the low space.
    low_dim: usize,
    #[serde(default = "one")]
    order: usize,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EncodingInput {
    v: Rows,
    p: Option<Rows>,
    q: Option<Rows>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifySimInput {
    h: OperatorJson,
    h_prime: OperatorJson,
    encoding: EncodingInput,
    delta: f64,
    eta: Option<f64>,
    epsilon: Option<f64>,
    betas: Option<Vec<f64>>,
    times: Option<Vec<f64>>,
    site_map: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DemoInput {
    h_target: OperatorJson,
    a: Option<f64>,
    m: Option<usize>,
    tau: Option<f64>,
    kappa: Option<f64>,
    idle_steps: Option<usize>,
    delta: Option<f64>,
    delta_prime: Option<f64>,
}

pub struct KitaevProblem {
    pub circuit: VerifierCircuit,
    pub rep: ClockRep,
    pub kappa: Option<f64>,
}

pub struct SwProblemInput {
    pub h0: DenseOperator,
    pub h1: DenseOperator,
    pub delta: f64,
    pub low_dim: usize,
    pub order: usize,
}

pub struct VerifySimProblem {
    pub h: DenseOperator,
    pub h_prime: DenseOperator,
    pub encoding: Encoding,
    pub delta: f64,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub betas: Vec<f64>,
    pub times: Vec<f64>,
    pub site_map: Option<Vec<Vec<usize>>>,
}

pub struct DemoProblem {
    pub h_target: DenseOperator,
    pub params: hamuniv::universality::EndToEndParams,
}

pub enum Problem {
    Spectrum(DenseOperator),
    Compile(VerifierCircuit),
    History(KitaevProblem),
    HmkCheck(KitaevProblem),
    Sw(SwProblemInput),
    VerifySim(VerifySimProblem),
    UniversalDemo(DemoProblem),
}

/// Reads and checks a problem file for `command`. Layouts without an explicit
/// `dim_cap` get `cap`; explicit caps are lowered to it.
pub fn validate_input(path: &Path, command: Command, cap: usize) -> Result<Problem, Diagnostics> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![Diagnostic::new("", format!("cannot read {}: {e}", path.display()))])?;
    validate_text(&text, command, cap)
}

pub fn validate_text(text: &str, command: Command, cap: usize) -> Result<Problem, Diagnostics> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic::new("", format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column()))]
    })?;
    apply_cap(&mut value, cap);
    match command {
        Command::Spectrum => Ok(Problem::Spectrum(hamiltonian(typed(value)?, "")?)),
        Command::Compile => Ok(Problem::Compile(circuit(typed(value)?, "")?)),
        Command::History => Ok(Problem::History(kitaev(typed(value)?)?)),
        Command::HmkCheck => Ok(Problem::HmkCheck(kitaev(typed(value)?)?)),
        Command::Sw => {
            let raw: SwInput = typed(value)?;
            let mut diags = Vec::new();
            let h0 = collect(hamiltonian(raw.h0, "h0"), &mut diags);
            let h1 = collect(hamiltonian(raw.h1, "h1"), &mut diags);
            positive(raw.delta, "delta", &mut diags);
            match (h0, h1) {
                (Some(h0), Some(h1)) if diags.is_empty() => {
                    Ok(Problem::Sw(SwProblemInput { h0, h1, delta: raw.delta, low_dim: raw.low_dim, order: raw.order }))
                }
                _ => Err(diags),
            }
        }
        Command::VerifySim => verify_sim(typed(value)?),
        Command::UniversalDemo => {
            let raw: DemoInput = typed(value)?;
            let h_target = hamiltonian(raw.h_target, "h_target")?;
            let d = hamuniv::universality::EndToEndParams::default();
            let params = hamuniv::universality::EndToEndParams {
                a: raw.a.unwrap_or(d.a),
                m: raw.m.unwrap_or(d.m),
                tau: raw.tau,
                kappa: raw.kappa,
                idle_steps: raw.idle_steps.unwrap_or(d.idle_steps),
                delta: raw.delta,
                delta_prime: raw.delta_prime,
            };
            Ok(Problem::UniversalDemo(DemoProblem { h_target, params }))
        }
    }
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T, Diagnostics> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        vec![Diagnostic::new(if path == "." { String::new() } else { path }, e.into_inner())]
    })
}

fn collect<T>(r: Result<T, Diagnostics>, diags: &mut Diagnostics) -> Option<T> {
    r.map_err(|d| diags.extend(d)).ok()
}

fn positive(x: f64, path: &str, diags: &mut Diagnostics) {
    if !(x.is_finite() && x > 0.0) {
        diags.push(Diagnostic::new(path, format!("must be positive, got {x}")));
    }
}

/// Every Hamiltonian input must be Hermitian, whatever its flag says.
fn hamiltonian(mut raw: OperatorJson, path: &str) -> Result<DenseOperator, Diagnostics> {
    raw.hermitian = true;
    raw.into_operator().map_err(|e| vec![Diagnostic::new(path, e)])
}

fn circuit(raw: CircuitJson, path: &str) -> Result<VerifierCircuit, Diagnostics> {
    let prefix = if path.is_empty() { String::new() } else { format!("{path}.") };
    // unitarity is checked gate by gate so every offending label is reported
    let diags: Diagnostics = raw
        .gates
        .iter()
        .enumerate()
        .filter_map(|(i, g)| g.clone().into_gate().err().map(|e| Diagnostic::new(format!("{prefix}gates[{i}]"), e)))
        .collect();
    if !diags.is_empty() {
        return Err(diags);
    }
    raw.into_circuit().map_err(|e| vec![Diagnostic::new(path, e)])
}

fn kitaev(raw: KitaevInput) -> Result<KitaevProblem, Diagnostics> {
    let circuit = circuit(raw.circuit, "circuit")?;
    if let Some(k) = raw.kappa {
        let mut diags = Vec::new();
        positive(k, "kappa", &mut diags);
        if !diags.is_empty() {
            return Err(diags);
        }
    }
    Ok(KitaevProblem { circuit, rep: raw.rep, kappa: raw.kappa })
}

fn verify_sim(raw: VerifySimInput) -> Result<Problem, Diagnostics> {
    let mut diags = Vec::new();
    let h = collect(hamiltonian(raw.h, "h"), &mut diags);
    let h_prime = collect(hamiltonian(raw.h_prime, "h_prime"), &mut diags);
    positive(raw.delta, "delta", &mut diags);
    let mat = |rows: &Option<Rows>, name: &str, diags: &mut Diagnostics| {
        rows.as_ref().and_then(|r| collect(matrix_from_rows(r).map_err(|e| vec![Diagnostic::new(name, e)]), diags))
    };
    let v = collect(
        matrix_from_rows(&raw.encoding.v).map_err(|e| vec![Diagnostic::new("encoding.v", e)]),
        &mut diags,
    );
    let p = mat(&raw.encoding.p, "encoding.p", &mut diags);
    let q = mat(&raw.encoding.q, "encoding.q", &mut diags);
    let betas = raw.betas.unwrap_or_else(|| vec![0.0, 0.1, 1.0, 10.0]);
    if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        diags.push(Diagnostic::new("betas", format!("inverse temperatures must be non-negative, got {b}")));
    }
    let times = raw.times.unwrap_or_else(|| vec![0.0, 0.5, 2.0]);
    let (Some(h), Some(h_prime), Some(v)) = (h, h_prime, v) else {
        return Err(diags);
    };
    if !diags.is_empty() {
        return Err(diags);
    }
    let layout = h_prime.layout().clone();
    let d = h.dim();
    let encoding = match (p, q) {
        (None, None) => Encoding::isometry(layout, d, v),
        (p, q) => {
            let r = p.as_ref().or(q.as_ref()).map_or(1, |m| m.nrows());
            let zero = || hamuniv::operators::linalg::zeros(r, r);
            Encoding::new(layout, d, v, p.unwrap_or_else(zero), q.unwrap_or_else(zero))
        }
    }
    .map_err(|e| vec![Diagnostic::new("encoding", e)])?;
    Ok(Problem::VerifySim(VerifySimProblem {
        h,
        h_prime,
        encoding,
        delta: raw.delta,
        eta: raw.eta,
        epsilon: raw.epsilon,
        betas,
        times,
        site_map: raw.site_map,
    }))
}

/// Sets `dim_cap` on every layout object (anything with `site_dims`).
fn apply_cap(value: &mut Value, cap: usize) {
    match value {
        Value::Object(map) => {
            if map.contains_key("site_dims") {
                let current = map.get("dim_cap").and_then(Value::as_u64).map(|c| c as usize);
                let cap = current.map_or(cap, |c| c.min(cap));
                map.insert("dim_cap".into(), Value::from(cap));
            }
            for v in map.values_mut() {
                apply_cap(v, cap);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| apply_cap(v, cap)),
        _ => {}
    }
}

/// Whether a library error describes bad input rather than a failed check.
pub fn is_input_error(e: &Error) -> bool {
    match e {
        Error::Stage { source, .. } => is_input_error(source),
        Error::DimensionMismatch(_)
        | Error::DimensionCap { .. }
        | Error::InvalidLayout(_)
        | Error::NotHermitian { .. }
        | Error::NotUnitary { .. }
        | Error::NotOrthonormal { .. }
        | Error::InvalidParameter(_)
        | Error::ReadoutCollision { .. }
        | Error::Json(_) => true,
        Error::ThresholdInCluster { .. }
        | Error::NoGap(_)
        | Error::RotationUndefined { .. }
        | Error::Precondition(_)
        | Error::Numerical(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diags(text: &str, command: Command) -> Diagnostics {
        match validate_text(text, command, 1 << 16) {
            Ok(_) => panic!("accepted {text}"),
            Err(d) => d,
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let d = diags("{\n  \"dim\": 2,\n  oops\n}", Command::Spectrum);
        assert!(d[0].message.contains("line 3"), "{}", d[0]);
    }

    #[test]
    fn schema_error_has_path() {
        let d = diags(r#"{"dim": 2, "layout": {"site_dims": [2]}, "entries": 3}"#, Command::Spectrum);
        assert_eq!(d[0].path, "entries");
    }

    #[test]
    fn non_hermitian_reports_asymmetry() {
        let text = r#"{"dim":2,"layout":{"site_dims":[2]},"entries":[[0,0],[1,0],[0.25,0],[0,0]],"hermitian":true}"#;
        let d = diags(text, Command::Spectrum);
        assert!(d[0].message.contains("asymmetry 7.5e-1"), "{}", d[0]);
    }

    #[test]
    fn cap_is_injected() {
        let text = r#"{"dim":4,"layout":{"site_dims":[2,2]},"entries":[[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#;
        let d = match validate_text(text, Command::Spectrum, 2) {
            Err(d) => d,
            Ok(_) => panic!("cap ignored"),
        };
        assert!(d[0].message.contains("cap"), "{}", d[0]);
        assert!(validate_text(text, Command::Spectrum, 4).is_ok());
    }

    #[test]
    fn stage_errors_classified_by_source() {
        let e = Error::Stage { stage: "x", source: Box::new(Error::InvalidParameter("y".into())) };
        assert!(is_input_error(&e));
        assert!(!is_input_error(&Error::Precondition("z".into())));
    }
}
