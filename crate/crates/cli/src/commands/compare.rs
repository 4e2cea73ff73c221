use std::fs;
use std::path::Path;

use isopurity::stats::{empirical_density, ks_against_cdf, l1_distance, l1_distance_cdf};
use isopurity::theory::support_params;
use isopurity::{Error, SchmidtSpectrum};
use serde::Serialize;

use super::{csv_finish, csv_writer, json_bytes, require_balanced};
use crate::args::CompareArgs;
use crate::error::{CliError, CliResult};
use crate::format::{fmt_f64, parse_rational};
use crate::manifest::{manifest_name_for, now, split_out, OutputSet};

#[derive(Serialize)]
struct Support {
    phase: String,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct Comparison {
    /// Histogram vs density evaluated at bin midpoints.
    l1: f64,
    ks_vs_analytic_cdf: f64,
    bins: usize,
    support: Support,
    /// Histogram vs exact analytic mass per bin.
    l1_bin_mass: f64,
    samples: usize,
    eigenvalues: usize,
    range: [f64; 2],
    out_of_range: usize,
}

fn schema(path: &Path, line: u64, what: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: line {line}: {what}", path.display()))
}

/// Parses a `sample_id,index,value` file into validated spectra.
///
/// Rows of one sample must be contiguous with indices `0, 1, ...` in order.
pub fn read_spectra(path: &Path, bytes: &[u8]) -> CliResult<Vec<SchmidtSpectrum>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| schema(path, 1, e))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CliError::Usage(format!("{}: empty spectra file", path.display())));
    }
    if headers.iter().collect::<Vec<_>>() != ["sample_id", "index", "value"] {
        return Err(schema(path, 1, "header must be `sample_id,index,value`"));
    }

    let mut spectra = Vec::new();
    let mut current: Option<(u64, Vec<f64>)> = None;
    let finish = |(id, values): (u64, Vec<f64>), line: u64| {
        SchmidtSpectrum::new(values).map_err(|e| schema(path, line, format!("sample {id}: {e}")))
    };
    for (row, record) in reader.records().enumerate() {
        let line = row as u64 + 2;
        let record = record.map_err(|e| schema(path, line, e))?;
        if record.len() != 3 {
            return Err(schema(path, line, format!("expected 3 fields, found {}", record.len())));
        }
        let id: u64 = record[0].parse().map_err(|_| schema(path, line, "sample_id is not an integer"))?;
        let index: usize = record[1].parse().map_err(|_| schema(path, line, "index is not an integer"))?;
        let value: f64 = record[2].parse().map_err(|_| schema(path, line, "value is not a number"))?;
        if !value.is_finite() {
            return Err(schema(path, line, "value is not finite"));
        }
        match &mut current {
            Some((cur, values)) if *cur == id => {
                if index != values.len() {
                    return Err(schema(path, line, format!("index {index} out of order")));
                }
                values.push(value);
            }
            _ => {
                if let Some(done) = current.take() {
                    spectra.push(finish(done, line)?);
                }
                if index != 0 {
                    return Err(schema(path, line, "first row of a sample must have index 0"));
                }
                current = Some((id, vec![value]));
            }
        }
    }
    match current {
        Some(done) => spectra.push(finish(done, 0)?),
        None => return Err(CliError::Usage(format!("{}: no eigenvalues in spectra file", path.display()))),
    }
    Ok(spectra)
}

pub fn run_compare(args: &CompareArgs) -> CliResult<()> {
    let started = now();
    let mu = parse_rational(&args.mu)?;
    require_balanced(mu)?;
    if args.bins == 0 {
        return Err(CliError::Usage("bins must be at least 1".into()));
    }
    let bytes =
        fs::read(&args.spectra).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.spectra.display())))?;
    let spectra = read_spectra(&args.spectra, &bytes)?;
    let params = match support_params(args.beta) {
        Err(Error::BelowBetaMinus { .. }) => {
            return Err(CliError::Usage(format!("beta below beta_minus=-2/27 (got {})", args.beta)))
        }
        other => other?,
    };

    let pool: Vec<f64> = spectra.iter().flat_map(|s| s.rescaled().collect::<Vec<_>>()).collect();
    let hi = pool.iter().copied().fold(params.a, f64::max);
    let hist = empirical_density(&pool, args.bins, (0.0, hi))?;
    let report = Comparison {
        l1: l1_distance(&hist, |l| params.density(l)),
        ks_vs_analytic_cdf: ks_against_cdf(&pool, |l| params.cdf(l))?,
        bins: args.bins,
        support: Support { phase: params.phase.to_string(), lower: params.lower_edge(), upper: params.a },
        l1_bin_mass: l1_distance_cdf(&hist, |l| params.cdf(l)),
        samples: spectra.len(),
        eigenvalues: pool.len(),
        range: [0.0, hi],
        out_of_range: hist.out_of_range,
    };

    let mut w = csv_writer();
    w.write_record(["bin_left", "bin_right", "density", "analytic_midpoint"])?;
    for (lo, hi, d) in hist.bins() {
        w.write_record([fmt_f64(lo), fmt_f64(hi), fmt_f64(d), fmt_f64(params.density(0.5 * (lo + hi)))])?;
    }

    let (dir, name) = split_out(&args.out);
    let mut outputs = OutputSet::new(dir)?;
    let spectra_path = fs::canonicalize(&args.spectra)?;
    outputs.record_input(&spectra_path, &bytes);
    outputs.write(&name, &json_bytes(&report)?)?;
    outputs.write("histogram.csv", &csv_finish(w)?)?;
    let mut recorded = args.clone();
    recorded.spectra = spectra_path;
    outputs.finish(&manifest_name_for(&name), "compare", serde_json::to_value(&recorded)?, started)?;
    Ok(())
}
