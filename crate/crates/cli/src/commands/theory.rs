use isopurity::theory::{
    entropy_rel, log_mgf, mean_purity_coeff, reported_entropy, reported_free_energy, support_params, PhaseParams,
    BETA_MINUS,
};
use isopurity::Error;
use num_rational::Rational64;
use serde_json::{Map, Value};

use super::{csv_finish, csv_writer, json_bytes, require_balanced};
use crate::args::{Quantity, SweepArgs, TheoryArgs};
use crate::error::{CliError, CliResult};
use crate::format::{fmt_f64, json_num, parse_rational};
use crate::manifest::{manifest_name_for, now, split_out, OutputSet};

const DEFAULT_QUANTITIES: [Quantity; 8] = [
    Quantity::A,
    Quantity::B,
    Quantity::C,
    Quantity::R,
    Quantity::G,
    Quantity::SRel,
    Quantity::ReportedF,
    Quantity::ReportedS,
];

fn below_critical(beta: f64) -> CliError {
    CliError::Usage(format!("beta below beta_minus=-2/27 (got {beta})"))
}

fn evaluate(q: Quantity, beta: f64, params: &PhaseParams, lambda: Option<f64>) -> CliResult<Value> {
    Ok(match q {
        Quantity::A => json_num(params.a),
        Quantity::B => params.b.map_or(Value::Null, json_num),
        Quantity::C => json_num(params.c),
        Quantity::Density => {
            let lambda = lambda.ok_or_else(|| CliError::Usage("quantity 'density' requires --lambda".into()))?;
            json_num(params.density(lambda))
        }
        Quantity::R => json_num(mean_purity_coeff(beta)?),
        Quantity::G => json_num(log_mgf(beta)?),
        Quantity::SRel => json_num(entropy_rel(beta)?),
        Quantity::ReportedF => json_num(reported_free_energy(beta)?),
        Quantity::ReportedS => json_num(reported_entropy(beta)?),
    })
}

pub fn run_theory(args: &TheoryArgs) -> CliResult<()> {
    let started = now();
    let mu = parse_rational(&args.mu)?;
    require_balanced(mu)?;
    if !args.beta.is_finite() {
        return Err(CliError::Usage(format!("beta={} must be finite", args.beta)));
    }
    let quantities: Vec<Quantity> = match &args.quantity {
        Some(q) => q.clone(),
        None => {
            let mut q = DEFAULT_QUANTITIES.to_vec();
            if args.lambda.is_some() {
                q.insert(3, Quantity::Density);
            }
            q
        }
    };

    let mut object = Map::new();
    match support_params(args.beta) {
        Ok(params) => {
            for &q in &quantities {
                object.insert(q.key().to_string(), evaluate(q, args.beta, &params, args.lambda)?);
            }
        }
        Err(Error::BelowBetaMinus { .. }) if args.allow_below_critical => {
            eprintln!(
                "warning: beta={} below beta_minus={BETA_MINUS}; no analytic saddle, quantities are null",
                args.beta
            );
            for &q in &quantities {
                object.insert(q.key().to_string(), Value::Null);
            }
        }
        Err(Error::BelowBetaMinus { .. }) => return Err(below_critical(args.beta)),
        Err(e) => return Err(e.into()),
    }

    let (dir, name) = split_out(&args.out);
    let mut outputs = OutputSet::new(dir)?;
    outputs.write(&name, &json_bytes(&Value::Object(object))?)?;
    outputs.finish(&manifest_name_for(&name), "theory", serde_json::to_value(args)?, started)?;
    Ok(())
}

/// Uniform grid of `steps` points including both endpoints.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|k| if k + 1 == steps { hi } else { lo + k as f64 * h }).collect()
}

pub fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    let started = now();
    let mu: Rational64 = parse_rational(&args.mu)?;
    require_balanced(mu)?;
    if !(args.beta_min.is_finite() && args.beta_max.is_finite()) {
        return Err(CliError::Usage("beta range must be finite".into()));
    }
    if args.beta_min < BETA_MINUS {
        return Err(below_critical(args.beta_min));
    }
    if args.beta_max < args.beta_min {
        return Err(CliError::Usage(format!(
            "beta-max={} must not be below beta-min={}",
            args.beta_max, args.beta_min
        )));
    }
    if args.steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    let table = isopurity::theory::sweep(&grid(args.beta_min, args.beta_max, args.steps), mu)?;
    if let Some((beta, e)) = table.errors.first() {
        return Err(CliError::Numerical(format!("sweep failed at beta={beta}: {e}")));
    }

    let mut w = csv_writer();
    w.write_record(["beta", "phase", "a", "b_or_c", "r", "G", "s_rel"])?;
    for row in &table.rows {
        w.write_record([
            fmt_f64(row.beta),
            row.phase.to_string(),
            fmt_f64(row.a),
            fmt_f64(row.b_or_c),
            fmt_f64(row.r),
            fmt_f64(row.g),
            fmt_f64(row.s_rel),
        ])?;
    }
    let bytes = csv_finish(w)?;

    let (dir, name) = split_out(&args.out);
    let mut outputs = OutputSet::new(dir)?;
    outputs.write(&name, &bytes)?;
    outputs.finish(&manifest_name_for(&name), "sweep", serde_json::to_value(args)?, started)?;
    Ok(())
}
