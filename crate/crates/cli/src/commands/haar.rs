use isopurity::haar::sample_spectra;
use isopurity::stats::{k_statistics, KStat, SampleSummary};
use isopurity::theory::{CumulantEntry, CumulantSet};
use isopurity::{purity, BipartitionDims};
use serde::Serialize;

use super::{csv_finish, csv_writer, json_bytes};
use crate::args::HaarArgs;
use crate::error::{CliError, CliResult};
use crate::format::fmt_f64;
use crate::manifest::{now, OutputSet};

#[derive(Serialize)]
struct LeadingCumulant {
    #[serde(flatten)]
    entry: CumulantEntry,
    /// Leading large-n value `coefficient / n^n_power` at this n.
    value: Option<f64>,
}

#[derive(Serialize)]
struct HaarSummary {
    n: usize,
    m: usize,
    mu: String,
    #[serde(flatten)]
    summary: SampleSummary,
    /// Exact finite-size mean `(n + m) / (nm + 1)`.
    exact_mean: f64,
    leading_cumulants: Vec<LeadingCumulant>,
}

pub fn run_haar(args: &HaarArgs) -> CliResult<()> {
    let started = now();
    let dims = BipartitionDims::new(args.n, args.m.unwrap_or(args.n))?;
    if args.samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    if args.chains == 0 {
        return Err(CliError::Usage("chains must be at least 1".into()));
    }
    let spectra = sample_spectra(dims, args.samples, args.seed, args.chains)?;
    let purities = spectra.iter().map(|s| purity(s).map(|r| r.purity)).collect::<Result<Vec<_>, _>>()?;

    let summary = if purities.len() >= 2 {
        k_statistics(&purities, 4.min(purities.len() as u32 - 1))?
    } else {
        let only = KStat { estimate: purities[0], std_error: None, high_variance: false };
        SampleSummary { count: 1, mean: purities[0], k_stats: [(1, only)].into_iter().collect(), blocks: 1 }
    };
    let (n, m) = (dims.n(), dims.m());
    let leading_cumulants = CumulantSet::exact(dims.mu(), 4)
        .map(|set| {
            set.to_entries()
                .into_iter()
                .map(|entry| LeadingCumulant { value: set.value(entry.order, n), entry })
                .collect()
        })
        .unwrap_or_default();
    let report = HaarSummary {
        n,
        m,
        mu: dims.mu().to_string(),
        summary,
        exact_mean: (n + m) as f64 / (n * m + 1) as f64,
        leading_cumulants,
    };

    let mut outputs = OutputSet::new(&args.out_dir)?;
    if args.emit.purity() {
        let mut w = csv_writer();
        w.write_record(["sample_id", "purity"])?;
        for (i, p) in purities.iter().enumerate() {
            w.write_record([i.to_string(), fmt_f64(*p)])?;
        }
        outputs.write("purity.csv", &csv_finish(w)?)?;
    }
    if args.emit.spectra() {
        let mut w = csv_writer();
        w.write_record(["sample_id", "index", "value"])?;
        for (i, s) in spectra.iter().enumerate() {
            for (k, v) in s.values().iter().enumerate() {
                w.write_record([i.to_string(), k.to_string(), fmt_f64(*v)])?;
            }
        }
        outputs.write("spectra.csv", &csv_finish(w)?)?;
    }
    outputs.write("summary.json", &json_bytes(&report)?)?;
    outputs.finish("manifest.json", "haar", serde_json::to_value(args)?, started)?;
    Ok(())
}
