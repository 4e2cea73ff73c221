use isopurity::coulomb::{pooled_n_purity, run_chains, ChainConfig, ChainDiagnostics, InitMode, Record};
use isopurity::theory::mean_purity_coeff;
use serde::Serialize;

use super::{csv_finish, csv_writer, json_bytes};
use crate::args::{InitArg, McmcArgs};
use crate::error::{CliError, CliResult};
use crate::format::{fmt_f64, parse_rational};
use crate::manifest::{now, OutputSet};

#[derive(Serialize)]
struct Pooled {
    chains: usize,
    recorded: usize,
    mean_acceptance_rate: f64,
    max_tau: Option<f64>,
    effective_samples: Option<f64>,
    mean_n_purity: Option<f64>,
    n_purity_std_error: Option<f64>,
    /// Large-n prediction for `N π` at this beta, when the analytic saddle exists.
    r_theory: Option<f64>,
    evaporated: bool,
}

#[derive(Serialize)]
struct Diagnostics {
    pooled: Pooled,
    chains: Vec<ChainDiagnostics>,
}

pub fn run_mcmc(args: &McmcArgs) -> CliResult<()> {
    let started = now();
    let mu = parse_rational(&args.mu)?;
    if args.chains == 0 {
        return Err(CliError::Usage("chains must be at least 1".into()));
    }
    if args.sweeps <= args.burn_in {
        return Err(CliError::Usage(format!("sweeps={} must exceed burn-in={}", args.sweeps, args.burn_in)));
    }
    if args.thin == 0 {
        return Err(CliError::Usage("thin must be at least 1".into()));
    }
    if args.beta < 0.0 {
        eprintln!("warning: metastable branch; evaporation monitored");
    }
    let config = ChainConfig {
        n: args.n,
        beta: args.beta,
        mu,
        init: match args.init {
            InitArg::UniformJitter => InitMode::UniformJitter,
            InitArg::HaarDraw => InitMode::HaarDraw,
        },
        sweeps: args.sweeps,
        burn_in: args.burn_in,
        thin: args.thin,
        record: Record::Both,
    };
    let chains = run_chains(&config, args.seed, args.chains)?;

    let mut outputs = OutputSet::new(&args.out_dir)?;
    for (k, chain) in chains.iter().enumerate() {
        let mut w = csv_writer();
        w.write_record(["sweep", "purity"])?;
        for (sweep, rec) in chain.sweeps.iter().zip(&chain.purities) {
            w.write_record([sweep.to_string(), fmt_f64(rec.purity)])?;
        }
        outputs.write(&format!("chain_{k}.csv"), &csv_finish(w)?)?;
    }

    let mut w = csv_writer();
    w.write_record(["sample_id", "index", "value"])?;
    let mut sample_id = 0usize;
    for chain in &chains {
        for spectrum in &chain.spectra {
            for (i, v) in spectrum.iter().enumerate() {
                w.write_record([sample_id.to_string(), i.to_string(), fmt_f64(*v)])?;
            }
            sample_id += 1;
        }
    }
    outputs.write("spectra.csv", &csv_finish(w)?)?;

    let diags: Vec<ChainDiagnostics> = chains.iter().map(|c| c.diagnostics.clone()).collect();
    let pooled_mean = pooled_n_purity(&chains);
    let evaporated = diags.iter().any(|d| d.evaporated);
    if evaporated {
        eprintln!("warning: at least one chain left the metastable support; see diagnostics.json");
    }
    let pooled = Pooled {
        chains: diags.len(),
        recorded: diags.iter().map(|d| d.recorded).sum(),
        mean_acceptance_rate: diags.iter().map(|d| d.acceptance_rate).sum::<f64>() / diags.len() as f64,
        max_tau: diags.iter().filter_map(|d| d.tau).reduce(f64::max),
        effective_samples: diags.iter().map(|d| d.effective_samples).sum(),
        mean_n_purity: pooled_mean.map(|p| p.0),
        n_purity_std_error: pooled_mean.map(|p| p.1),
        r_theory: if mu == num_rational::Rational64::from_integer(0) {
            mean_purity_coeff(args.beta).ok()
        } else {
            None
        },
        evaporated,
    };
    outputs.write("diagnostics.json", &json_bytes(&Diagnostics { pooled, chains: diags })?)?;
    outputs.finish("manifest.json", "mcmc", serde_json::to_value(args)?, started)?;
    Ok(())
}
