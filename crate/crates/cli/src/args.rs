use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Purity statistics of random bipartite states: analytic phase diagram,
/// Haar sampling and fixed-purity Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "isopurity", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate analytic quantities at one inverse temperature.
    Theory(TheoryArgs),
    /// Tabulate the phase diagram on a uniform beta grid.
    Sweep(SweepArgs),
    /// Sample Haar-random states and their purities.
    Haar(HaarArgs),
    /// Run the Coulomb-gas Metropolis sampler.
    Mcmc(McmcArgs),
    /// Compare a spectra file with the analytic eigenvalue density.
    Compare(CompareArgs),
    /// Re-run the command recorded in a manifest and check output digests.
    Replay(ReplayArgs),
}

impl Command {
    pub fn from_manifest(command: &str, parameters: serde_json::Value) -> CliResult<Self> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("manifest parameters for '{command}': {e}"));
        Ok(match command {
            "theory" => Command::Theory(serde_json::from_value(parameters).map_err(bad)?),
            "sweep" => Command::Sweep(serde_json::from_value(parameters).map_err(bad)?),
            "haar" => Command::Haar(serde_json::from_value(parameters).map_err(bad)?),
            "mcmc" => Command::Mcmc(serde_json::from_value(parameters).map_err(bad)?),
            "compare" => Command::Compare(serde_json::from_value(parameters).map_err(bad)?),
            other => return Err(CliError::Usage(format!("manifest names unknown command '{other}'"))),
        })
    }

    /// Redirects every output of the command into `dir`, keeping file names.
    pub fn rebase(&mut self, dir: &Path) {
        let move_file = |p: &mut PathBuf| {
            let name = p.file_name().map(PathBuf::from).unwrap_or_default();
            *p = dir.join(name);
        };
        match self {
            Command::Theory(a) => move_file(&mut a.out),
            Command::Sweep(a) => move_file(&mut a.out),
            Command::Compare(a) => move_file(&mut a.out),
            Command::Haar(a) => a.out_dir = dir.to_path_buf(),
            Command::Mcmc(a) => a.out_dir = dir.to_path_buf(),
            Command::Replay(_) => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Quantity {
    #[value(name = "a")]
    #[serde(rename = "a")]
    A,
    #[value(name = "b")]
    #[serde(rename = "b")]
    B,
    #[value(name = "c")]
    #[serde(rename = "c")]
    C,
    #[value(name = "density")]
    #[serde(rename = "density")]
    Density,
    #[value(name = "r")]
    #[serde(rename = "r")]
    R,
    #[value(name = "G")]
    #[serde(rename = "G")]
    G,
    #[value(name = "s_rel")]
    #[serde(rename = "s_rel")]
    SRel,
    #[value(name = "reported_F")]
    #[serde(rename = "reported_F")]
    ReportedF,
    #[value(name = "reported_S")]
    #[serde(rename = "reported_S")]
    ReportedS,
}

impl Quantity {
    pub fn key(self) -> &'static str {
        match self {
            Quantity::A => "a",
            Quantity::B => "b",
            Quantity::C => "c",
            Quantity::Density => "density",
            Quantity::R => "r",
            Quantity::G => "G",
            Quantity::SRel => "s_rel",
            Quantity::ReportedF => "reported_F",
            Quantity::ReportedS => "reported_S",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct TheoryArgs {
    #[arg(long)]
    pub beta: f64,
    /// Imbalance m/n - 1 as an integer, fraction or decimal.
    #[arg(long, default_value = "0")]
    pub mu: String,
    /// Comma-separated list; defaults to everything computable.
    #[arg(long, value_delimiter = ',')]
    pub quantity: Option<Vec<Quantity>>,
    /// Rescaled eigenvalue at which `density` is evaluated.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Emit null for quantities undefined below beta_minus instead of failing.
    #[arg(long)]
    pub allow_below_critical: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[arg(long)]
    pub beta_min: f64,
    #[arg(long)]
    pub beta_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value = "0")]
    pub mu: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Purity,
    Spectra,
    Both,
}

impl Emit {
    pub fn purity(self) -> bool {
        matches!(self, Emit::Purity | Emit::Both)
    }

    pub fn spectra(self) -> bool {
        matches!(self, Emit::Spectra | Emit::Both)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HaarArgs {
    #[arg(long)]
    pub n: usize,
    /// Dimension of the larger subsystem; defaults to n.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent random sub-streams; results depend on this, not on thread count.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, value_enum, default_value_t = Emit::Purity)]
    pub emit: Emit,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    UniformJitter,
    HaarDraw,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct McmcArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value = "0")]
    pub mu: String,
    /// Total sweeps per chain, burn-in included.
    #[arg(long)]
    pub sweeps: u64,
    #[arg(long)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, value_enum, default_value_t = InitArg::UniformJitter)]
    pub init: InitArg,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    /// File with header `sample_id,index,value` holding raw eigenvalues.
    #[arg(long)]
    pub spectra: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value = "0")]
    pub mu: String,
    #[arg(long, default_value_t = 160)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory receiving the regenerated files.
    #[arg(long)]
    pub out_dir: PathBuf,
}
