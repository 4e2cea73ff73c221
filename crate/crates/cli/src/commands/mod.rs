mod compare;
mod haar;
mod mcmc;
mod theory;

use std::fs;

use num_rational::Rational64;
use serde::Serialize;

use compare::run_compare;
use haar::run_haar;
use mcmc::run_mcmc;
use theory::{run_sweep, run_theory};

use crate::args::{Command, ReplayArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, RunManifest};

/// Pretty JSON with a trailing newline.
pub(crate) fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

pub(crate) fn csv_finish(w: csv::Writer<Vec<u8>>) -> CliResult<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// The analytic phase diagram exists only for equal subsystem dimensions.
pub(crate) fn require_balanced(mu: Rational64) -> CliResult<()> {
    if mu != Rational64::from_integer(0) {
        return Err(CliError::Usage(format!("analytic results are available only for mu=0 (got {mu})")));
    }
    Ok(())
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Theory(a) => run_theory(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Haar(a) => run_haar(a),
        Command::Mcmc(a) => run_mcmc(a),
        Command::Compare(a) => run_compare(a),
        Command::Replay(a) => run_replay(a),
    }
}

fn run_replay(args: &ReplayArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.manifest)?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("unreadable manifest: {e}")))?;
    let mut command = Command::from_manifest(&manifest.command, manifest.parameters.clone())?;
    command.rebase(&args.out_dir);
    execute(&command)?;

    let mut mismatched = Vec::new();
    for file in &manifest.outputs {
        let bytes = fs::read(args.out_dir.join(&file.path))?;
        if sha256_hex(&bytes) != file.sha256 {
            mismatched.push(file.path.clone());
        }
    }
    if !mismatched.is_empty() {
        return Err(CliError::Mismatch(mismatched.join(", ")));
    }
    eprintln!("replayed {}: {} output(s) match", manifest.command, manifest.outputs.len());
    Ok(())
}
