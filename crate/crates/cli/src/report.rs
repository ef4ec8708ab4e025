//! Report assembly and output. Everything here is deterministic: no clocks,
//! no hash-ordered maps, shortest round-trip float formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use hamuniv::Constants;
use serde::Serialize;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    constants: &'a Constants,
    pass: bool,
    result: &'a T,
}

/// A finished run: JSON text, optional CSV table, overall verdict.
pub struct Outcome {
    pub json: String,
    pub csv: Option<String>,
    pub pass: bool,
}

pub struct Context<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub constants: &'a Constants,
}

impl Context<'_> {
    pub fn outcome<T: Serialize>(&self, result: &T, pass: bool, csv: Option<String>) -> Outcome {
        let env = Envelope { command: self.command, seed: self.seed, constants: self.constants, pass, result };
        let mut json = serde_json::to_string_pretty(&env).expect("reports serialize");
        json.push('\n');
        Outcome { json, csv, pass }
    }
}

/// `-0` prints as `0`; moderate magnitudes print in plain decimal, the rest in
/// exponent form.
pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if x.is_nan() {
        return "nan".into();
    }
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || a.is_infinite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Rows of already formatted cells; a header line when given.
pub fn csv(header: Option<&[&str]>, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn csv_column(values: &[f64]) -> String {
    csv(None, values.iter().map(|&v| vec![fmt_num(v)]))
}

/// JSON goes to `output` (stdout when absent); the CSV goes to `csv_path`, or
/// next to `output` with a `.csv` extension.
pub fn write(outcome: &Outcome, output: Option<&Path>, csv_path: Option<&Path>) -> std::io::Result<()> {
    match output {
        Some(p) => std::fs::write(p, &outcome.json)?,
        None => std::io::stdout().write_all(outcome.json.as_bytes())?,
    }
    let target: Option<PathBuf> = csv_path.map(Path::to_path_buf).or_else(|| output.map(|p| p.with_extension("csv")));
    if let (Some(t), Some(csv)) = (target, &outcome.csv) {
        std::fs::write(t, csv)?;
    }
    Ok(())
}
