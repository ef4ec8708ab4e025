//! `hamuniv`: run the toolkit's pipelines on JSON problem files.
//!
//! Exit status: 0 when every check in the report passes, 1 when a check fails
//! or a pipeline stage cannot complete, 2 on bad input.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hamuniv", version, about = "Circuit-to-Hamiltonian and simulation certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (JSON).
    #[arg(long, global = true, env = "HAMUNIV_INPUT")]
    input: Option<PathBuf>,

    /// Report file (JSON); printed to stdout when absent.
    #[arg(long, global = true, env = "HAMUNIV_OUTPUT")]
    output: Option<PathBuf>,

    /// Table file (CSV); defaults to the report path with a .csv extension.
    #[arg(long, global = true, env = "HAMUNIV_CSV")]
    csv: Option<PathBuf>,

    /// Seed for randomized parts of a run.
    #[arg(long, global = true, env = "HAMUNIV_SEED", default_value_t = 0)]
    seed: u64,

    /// Largest Hilbert-space dimension any layout may reach.
    #[arg(long, global = true, env = "HAMUNIV_CAP")]
    cap: Option<usize>,

    /// Bound constant, e.g. `--const C_dev=12` (repeatable).
    #[arg(long = "const", global = true, env = "HAMUNIV_CONST", value_delimiter = ',', value_parser = parse_const)]
    constants: Vec<(String, f64)>,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Eigenvalues of a Hermitian operator.
    Spectrum,
    /// Compile a verifier circuit and its acceptance operator.
    Compile,
    /// Check history states against the Kitaev propagation Hamiltonian.
    History,
    /// Check the modified-Kitaev low-energy spectrum.
    HmkCheck,
    /// Schrieffer-Wolff effective Hamiltonian and bounds.
    Sw,
    /// Certify one Hamiltonian as a simulation of another.
    VerifySim,
    /// End-to-end universality construction for a small target.
    UniversalDemo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Compile => "compile",
            Command::History => "history",
            Command::HmkCheck => "hmk-check",
            Command::Sw => "sw",
            Command::VerifySim => "verify-sim",
            Command::UniversalDemo => "universal-demo",
        }
    }
}

fn parse_const(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli))
}

fn run(cli: Cli) -> u8 {
    let name = cli.command.name();
    let constants = match commands::constants(&cli.constants, cli.cap) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let Some(path) = cli.input.as_deref() else {
        eprintln!("error: {name} needs --input <FILE>");
        return 2;
    };
    let problem = match input::validate_input(path, cli.command, constants.dim_cap) {
        Ok(p) => p,
        Err(diags) => {
            for d in &diags {
                eprintln!("error: {}: {d}", path.display());
            }
            return 2;
        }
    };
    let ctx = report::Context { command: name, seed: cli.seed, constants: &constants };
    let outcome = match commands::run(problem, &ctx) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            if input::is_input_error(&e) {
                return 2;
            }
            let failure = ctx.outcome(&serde_json::json!({ "error": e.to_string() }), false, None);
            if let Err(io) = report::write(&failure, cli.output.as_deref(), None) {
                eprintln!("error: writing report: {io}");
            }
            return 1;
        }
    };
    if let Err(e) = report::write(&outcome, cli.output.as_deref(), cli.csv.as_deref()) {
        eprintln!("error: writing report: {e}");
        return 2;
    }
    if outcome.pass {
        0
    } else {
        eprintln!("{name}: a check failed; see the report");
        1
    }
}
