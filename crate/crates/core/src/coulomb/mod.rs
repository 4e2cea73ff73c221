//! Metropolis sampler for the eigenvalue gas
//!
//! ```text
//! P(λ) ∝ ∏_{i<j} (λ_i - λ_j)² ∏_i λ_i^{μN} exp(-β N³ Σ λ_i²) δ(1 - Σ λ_i)
//! ```
//!
//! on the open unit simplex. Moves transfer mass `δ` between two eigenvalues,
//! so the trace constraint holds by construction and only two rows of the
//! pairwise log-distance sum change per proposal.

mod diagnostics;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use diagnostics::{autocorrelation_time, evaporation_monitor, AutocorrTime};

use crate::error::{Error, Result};
use crate::haar::{reduced_spectrum, sample_state};
use crate::rng::substream;
use crate::spectrum::{purity, BipartitionDims, PurityRecord, SchmidtSpectrum};
use crate::theory::{support_params, BETA_MINUS};

/// Sweeps between cache checks and trace renormalization.
pub const MAINTENANCE_INTERVAL: u64 = 1000;
/// Acceptance rate the burn-in step adaptation steers toward.
pub const TARGET_ACCEPTANCE: f64 = 0.35;
const INITIAL_STEP: f64 = 0.5;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }

    fn from_value(x: f64) -> Self {
        Self { sum: x, carry: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    UniformJitter,
    HaarDraw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    Purity,
    Spectrum,
    Both,
}

impl Record {
    fn purity(self) -> bool {
        matches!(self, Record::Purity | Record::Both)
    }

    fn spectrum(self) -> bool {
        matches!(self, Record::Spectrum | Record::Both)
    }
}

/// `(2 Σ_{i<j} ln|λ_i - λ_j|, Σ λ_i², Σ ln λ_i)` computed from scratch.
fn fresh_terms(lambdas: &[f64]) -> (f64, f64, f64) {
    let mut vdm = CompensatedSum::default();
    let mut sq = CompensatedSum::default();
    let mut logs = CompensatedSum::default();
    for (i, &li) in lambdas.iter().enumerate() {
        for &lj in &lambdas[i + 1..] {
            vdm.add(2.0 * (li - lj).abs().ln());
        }
        sq.add(li * li);
        logs.add(li.ln());
    }
    (vdm.value(), sq.value(), logs.value())
}

/// Log of the unnormalized eigenvalue weight:
/// `2 Σ_{i<j} ln|λ_i - λ_j| + μN Σ ln λ_i - β N³ Σ λ_i²`.
///
/// Coincident eigenvalues give `-∞`.
pub fn log_weight(lambdas: &[f64], beta: f64, mu: Rational64, n: usize) -> Result<f64> {
    if let Some(bad) = lambdas.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::DomainError(format!("eigenvalue {bad} is not positive")));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Ok(f64::NEG_INFINITY);
    }
    let (vdm, sq, logs) = fresh_terms(lambdas);
    let nf = n as f64;
    Ok(vdm + mu_exponent(mu, n) * logs - beta * nf.powi(3) * sq)
}

fn mu_exponent(mu: Rational64, n: usize) -> f64 {
    mu.to_f64().unwrap_or(f64::NAN) * n as f64
}

/// State of one Metropolis chain.
#[derive(Debug, Clone)]
pub struct CoulombChainState {
    lambdas: Vec<f64>,
    beta: f64,
    mu: Rational64,
    n: usize,
    mu_n: f64,
    n_cubed: f64,
    logvdm: CompensatedSum,
    sumsq: CompensatedSum,
    sumlog: CompensatedSum,
    step: f64,
    adapting: bool,
    rng: ChaCha8Rng,
    accepted: u64,
    proposed: u64,
    sweep_index: u64,
    max_renorm_correction: f64,
    max_cache_discrepancy: f64,
}

/// Seed of a chain: the run seed plus the sub-stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSeed {
    pub seed: u64,
    pub stream: u64,
}

impl From<u64> for ChainSeed {
    fn from(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }
}

/// Builds a chain at `(n, beta, mu)` from the given starting configuration.
pub fn init_chain(
    n: usize,
    beta: f64,
    mu: Rational64,
    seed: impl Into<ChainSeed>,
    mode: InitMode,
) -> Result<CoulombChainState> {
    if n < 2 {
        return Err(Error::InvalidDims(format!("chain needs n >= 2, got {n}")));
    }
    if mu < Rational64::from_integer(0) {
        return Err(Error::InvalidDims(format!("mu={mu} must be >= 0")));
    }
    if !beta.is_finite() {
        return Err(Error::DomainError(format!("beta={beta} must be finite")));
    }
    if beta < 0.0 {
        log::info!("beta={beta} < 0: metastable branch; evaporation monitored");
        if beta < BETA_MINUS {
            log::warn!("beta={beta} below beta_minus=-2/27: no analytic saddle exists");
        }
    }
    let seed = seed.into();
    let mut rng = substream(seed.seed, seed.stream);
    let lambdas = match mode {
        InitMode::UniformJitter => {
            let raw: Vec<f64> = (0..n).map(|_| 1.0 + rng.random_range(-0.01..0.01)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        }
        InitMode::HaarDraw => {
            let dims = BipartitionDims::from_imbalance(n, mu)?;
            let values = reduced_spectrum(&sample_state(dims, &mut rng))?.into_values();
            if values.iter().any(|&v| !(v > 0.0)) || values.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DomainError("Haar draw produced a degenerate spectrum".into()));
            }
            values
        }
    };
    let (vdm, sq, logs) = fresh_terms(&lambdas);
    Ok(CoulombChainState {
        lambdas,
        beta,
        mu,
        n,
        mu_n: mu_exponent(mu, n),
        n_cubed: (n as f64).powi(3),
        logvdm: CompensatedSum::from_value(vdm),
        sumsq: CompensatedSum::from_value(sq),
        sumlog: CompensatedSum::from_value(logs),
        step: INITIAL_STEP,
        adapting: true,
        rng,
        accepted: 0,
        proposed: 0,
        sweep_index: 0,
        max_renorm_correction: 0.0,
        max_cache_discrepancy: 0.0,
    })
}

impl CoulombChainState {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> Rational64 {
        self.mu
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn sweep_index(&self) -> u64 {
        self.sweep_index
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn proposed(&self) -> u64 {
        self.proposed
    }

    /// Enables or freezes burn-in step adaptation.
    pub fn set_adapting(&mut self, adapting: bool) {
        self.adapting = adapting;
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    /// Current log-weight from the incrementally maintained caches.
    pub fn cached_log_weight(&self) -> f64 {
        self.logvdm.value() + self.mu_n * self.sumlog.value() - self.beta * self.n_cubed * self.sumsq.value()
    }

    /// Largest gap between cached and recomputed terms seen at maintenance points.
    pub fn max_cache_discrepancy(&self) -> f64 {
        self.max_cache_discrepancy
    }

    pub fn max_renorm_correction(&self) -> f64 {
        self.max_renorm_correction
    }

    /// Absolute differences `(logvdm, sumsq, sumlog)` between caches and a fresh recomputation.
    pub fn cache_discrepancy(&self) -> (f64, f64, f64) {
        let (vdm, sq, logs) = fresh_terms(&self.lambdas);
        ((vdm - self.logvdm.value()).abs(), (sq - self.sumsq.value()).abs(), (logs - self.sumlog.value()).abs())
    }

    pub fn spectrum(&self) -> Result<SchmidtSpectrum> {
        SchmidtSpectrum::new(self.lambdas.clone())
    }

    /// Change in the log-Vandermonde term `2 Σ ln|λ_k - λ_l|` when `λ_i, λ_j`
    /// move to `new_i, new_j`.
    fn delta_logvdm(&self, i: usize, j: usize, new_i: f64, new_j: f64) -> f64 {
        let (old_i, old_j) = (self.lambdas[i], self.lambdas[j]);
        let mut acc = 0.0;
        for (k, &lk) in self.lambdas.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let ratio = ((new_i - lk) * (new_j - lk)) / ((old_i - lk) * (old_j - lk));
            acc += ratio.abs().ln();
        }
        acc += ((new_i - new_j) / (old_i - old_j)).abs().ln();
        2.0 * acc
    }

    /// `log_weight(after) - log_weight(before)` for moving `delta` from `λ_j` to `λ_i`.
    ///
    /// Returns `-∞` when the move leaves the simplex or makes two eigenvalues coincide.
    pub fn proposal_delta(&self, i: usize, j: usize, delta: f64) -> f64 {
        let (old_i, old_j) = (self.lambdas[i], self.lambdas[j]);
        let (new_i, new_j) = (old_i + delta, old_j - delta);
        if !(new_i > 0.0 && new_j > 0.0) {
            return f64::NEG_INFINITY;
        }
        let dvdm = self.delta_logvdm(i, j, new_i, new_j);
        let dlog = (new_i / old_i).ln() + (new_j / old_j).ln();
        let dsq = 2.0 * delta * (old_i - old_j) + 2.0 * delta * delta;
        let total = dvdm + self.mu_n * dlog - self.beta * self.n_cubed * dsq;
        if total.is_nan() {
            f64::NEG_INFINITY
        } else {
            total
        }
    }

    fn apply(&mut self, i: usize, j: usize, delta: f64) {
        let (old_i, old_j) = (self.lambdas[i], self.lambdas[j]);
        let (new_i, new_j) = (old_i + delta, old_j - delta);
        self.logvdm.add(self.delta_logvdm(i, j, new_i, new_j));
        self.sumlog.add((new_i / old_i).ln() + (new_j / old_j).ln());
        self.sumsq.add(2.0 * delta * (old_i - old_j) + 2.0 * delta * delta);
        self.lambdas[i] = new_i;
        self.lambdas[j] = new_j;
    }

    /// One pair-transfer proposal; returns whether it was accepted.
    fn propose(&mut self) -> bool {
        let n = self.n;
        let i = self.rng.random_range(0..n);
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let delta = self.rng.random_range(-1.0..1.0) * self.step / n as f64;
        self.proposed += 1;
        let (new_i, new_j) = (self.lambdas[i] + delta, self.lambdas[j] - delta);
        if !(new_i > 0.0 && new_j > 0.0) {
            return false;
        }
        let dw = self.proposal_delta(i, j, delta);
        let accept = dw >= 0.0 || self.rng.random::<f64>() < dw.exp();
        if accept {
            self.apply(i, j, delta);
            self.accepted += 1;
        }
        accept
    }

    /// Checks caches against a recomputation, then restores `Σλ = 1` exactly
    /// enough to cancel accumulated round-off.
    fn maintain(&mut self) {
        let (a, b, c) = self.cache_discrepancy();
        self.max_cache_discrepancy = self.max_cache_discrepancy.max(a).max(b).max(c);
        let total: f64 = self.lambdas.iter().sum();
        self.max_renorm_correction = self.max_renorm_correction.max((total - 1.0).abs());
        for l in self.lambdas.iter_mut() {
            *l /= total;
        }
        let (vdm, sq, logs) = fresh_terms(&self.lambdas);
        self.logvdm = CompensatedSum::from_value(vdm);
        self.sumsq = CompensatedSum::from_value(sq);
        self.sumlog = CompensatedSum::from_value(logs);
    }
}

/// Performs `n` Metropolis proposals; adapts the step while burn-in adaptation is on.
pub fn sweep_once(state: &mut CoulombChainState) {
    let mut accepted = 0usize;
    for _ in 0..state.n {
        accepted += usize::from(state.propose());
    }
    if state.adapting {
        let rate = accepted as f64 / state.n as f64;
        state.step *= if rate > TARGET_ACCEPTANCE { 1.05 } else { 0.95 };
    }
    state.sweep_index += 1;
    if state.sweep_index.is_multiple_of(MAINTENANCE_INTERVAL) {
        state.maintain();
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDiagnostics {
    pub n: usize,
    pub beta: f64,
    pub mu: String,
    pub sweeps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub recorded: usize,
    /// Post-burn-in acceptance rate.
    pub acceptance_rate: f64,
    pub final_step: f64,
    pub mean_purity: Option<f64>,
    /// Mean of `N π`, the finite-size estimate of `r(β)`.
    pub mean_n_purity: Option<f64>,
    /// Standard error of `mean_n_purity`, inflated by `2τ`.
    pub n_purity_std_error: Option<f64>,
    pub tau: Option<f64>,
    pub effective_samples: Option<f64>,
    pub zero_variance: bool,
    pub evaporated: bool,
    pub first_escape_sweep: Option<u64>,
    pub max_renorm_correction: f64,
    pub max_cache_discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// Sweep index of each recorded configuration.
    pub sweeps: Vec<u64>,
    pub purities: Vec<PurityRecord>,
    /// Raw eigenvalues (simplex units, sorted descending) of each recorded configuration.
    pub spectra: Vec<Vec<f64>>,
    pub diagnostics: ChainDiagnostics,
}

impl ChainOutput {
    /// All recorded eigenvalues multiplied by `n`.
    pub fn rescaled_pool(&self) -> Vec<f64> {
        let n = self.diagnostics.n as f64;
        self.spectra.iter().flatten().map(|v| v * n).collect()
    }

    pub fn n_purity_series(&self) -> Vec<f64> {
        let n = self.diagnostics.n as f64;
        self.purities.iter().map(|r| r.purity * n).collect()
    }
}

/// Runs `sweeps` sweeps in total, the first `burn_in` with step adaptation,
/// recording every `thin`-th sweep afterwards.
pub fn run(state: &mut CoulombChainState, sweeps: u64, burn_in: u64, thin: u64, record: Record) -> Result<ChainOutput> {
    if sweeps <= burn_in {
        return Err(Error::DomainError(format!("sweeps={sweeps} must exceed burn_in={burn_in}")));
    }
    if thin == 0 {
        return Err(Error::DomainError("thin must be at least 1".into()));
    }
    let monitor =
        (state.beta < 0.0).then(|| support_params(state.beta.max(BETA_MINUS)).expect("clamped beta is in the domain"));
    let mut first_escape = None;
    let mut out_sweeps = Vec::new();
    let mut purities = Vec::new();
    let mut spectra = Vec::new();
    let (mut acc0, mut prop0) = (state.accepted, state.proposed);

    for s in 0..sweeps {
        if s == burn_in {
            acc0 = state.accepted;
            prop0 = state.proposed;
        }
        state.adapting = s < burn_in;
        sweep_once(state);
        if let Some(params) = &monitor {
            if first_escape.is_none() && evaporation_monitor(state, params) {
                first_escape = Some(state.sweep_index);
            }
        }
        if s >= burn_in && (s - burn_in + 1).is_multiple_of(thin) {
            let spectrum = state.spectrum()?;
            if record.purity() {
                purities.push(purity(&spectrum)?);
            }
            if record.spectrum() {
                spectra.push(spectrum.into_values());
            }
            out_sweeps.push(state.sweep_index);
        }
    }
    state.adapting = false;

    let proposed = state.proposed - prop0;
    let acceptance_rate = if proposed > 0 { (state.accepted - acc0) as f64 / proposed as f64 } else { 0.0 };
    let nf = state.n as f64;
    let n_pur: Vec<f64> = purities.iter().map(|r| r.purity * nf).collect();
    let mean_n_purity = (!n_pur.is_empty()).then(|| n_pur.iter().sum::<f64>() / n_pur.len() as f64);
    let ac = autocorrelation_time(&n_pur).ok();
    let (tau, effective_samples, n_purity_std_error, zero_variance) = match (&ac, mean_n_purity) {
        (Some(ac), Some(mean)) => {
            let len = n_pur.len() as f64;
            let var = n_pur.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0);
            let ess = len / (2.0 * ac.tau);
            (Some(ac.tau), Some(ess), Some((var / ess).sqrt()), ac.zero_variance)
        }
        _ => (None, None, None, false),
    };

    Ok(ChainOutput {
        sweeps: out_sweeps,
        diagnostics: ChainDiagnostics {
            n: state.n,
            beta: state.beta,
            mu: state.mu.to_string(),
            sweeps,
            burn_in,
            thin,
            recorded: n_pur.len().max(spectra.len()),
            acceptance_rate,
            final_step: state.step,
            mean_purity: mean_n_purity.map(|m| m / nf),
            mean_n_purity,
            n_purity_std_error,
            tau,
            effective_samples,
            zero_variance,
            evaporated: first_escape.is_some(),
            first_escape_sweep: first_escape,
            max_renorm_correction: state.max_renorm_correction,
            max_cache_discrepancy: state.max_cache_discrepancy,
        },
        purities,
        spectra,
    })
}

/// Parameters shared by every chain of a multi-chain run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub n: usize,
    pub beta: f64,
    pub mu: Rational64,
    pub init: InitMode,
    pub sweeps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub record: Record,
}

/// Runs `chains` independent chains on sub-streams `0..chains` of `seed`.
///
/// Chains run in parallel; results are ordered by chain index.
pub fn run_chains(config: &ChainConfig, seed: u64, chains: usize) -> Result<Vec<ChainOutput>> {
    (0..chains.max(1) as u64)
        .into_par_iter()
        .map(|k| {
            let mut state = init_chain(config.n, config.beta, config.mu, ChainSeed { seed, stream: k }, config.init)?;
            run(&mut state, config.sweeps, config.burn_in, config.thin, config.record)
        })
        .collect()
}

/// Mean of `N π` over chains with its standard error (chains treated as independent).
pub fn pooled_n_purity(outputs: &[ChainOutput]) -> Option<(f64, f64)> {
    let stats: Vec<(f64, f64, usize)> = outputs
        .iter()
        .map(|o| Some((o.diagnostics.mean_n_purity?, o.diagnostics.n_purity_std_error?, o.purities.len())))
        .collect::<Option<_>>()?;
    let total: usize = stats.iter().map(|s| s.2).sum();
    if total == 0 {
        return None;
    }
    let mean = stats.iter().map(|&(m, _, len)| m * len as f64).sum::<f64>() / total as f64;
    let var = stats.iter().map(|&(_, se, len)| (se * len as f64 / total as f64).powi(2)).sum::<f64>();
    Some((mean, var.sqrt()))
}
