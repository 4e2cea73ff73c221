//! Large-`N` phase diagram of the purity-biased ensemble.
//!
//! Eigenvalues are measured in rescaled units `N λ_i`, where the limiting
//! density has unit mass and unit mean. Two phases exist above
//! `β₋ = -2/27`:
//!
//! * high temperature, `β₋ <= β <= β₊`: `ρ(λ) = (c/2 + βλ) √((a-λ)/λ) / π` on `[0, a]`,
//!   parameterized by the right edge `a` and `c = βb`, which stays finite at `β = 0`;
//! * semicircle, `β > β₊ = 2`: `ρ(λ) = β √((λ-b)(a-λ)) / π` on `[b, a]`.
//!
//! Mean purity is `r(β) / N` with `r` from [`mean_purity_coeff`]; the cumulant
//! generating function is obtained by integrating `r` from zero.

mod cumulants;
mod support;
mod thermo;

pub use cumulants::{
    balanced_cumulant, cumulant_exact, cumulant_from_taylor, purity_taylor, purity_taylor_exact, series_a_coefficient,
    unbalanced_cumulant, CumulantEntry, CumulantSet,
};
pub use support::{density, density_moments, series_a, support_params, Phase, PhaseParams};
pub use thermo::{
    entropy_rel, log_mgf, mean_purity_coeff, reported_entropy, reported_free_energy, sweep, TheoryRow, TheoryTable,
};

/// Lower critical inverse temperature, `-2/27`.
pub const BETA_MINUS: f64 = -2.0 / 27.0;
/// Upper critical inverse temperature, `2`.
pub const BETA_PLUS: f64 = 2.0;

/// `(β₋, β₊) = (-2/27, 2)`.
pub fn critical_betas() -> (f64, f64) {
    (BETA_MINUS, BETA_PLUS)
}
