//! Purity statistics of random bipartite pure states.
//!
//! The crate covers three independent routes to the distribution of the
//! purity `Tr ρ_A²` of a random bipartite state, biased by a fictitious
//! inverse temperature `β`:
//!
//! * [`theory`]: closed-form large-`N` phase diagram (support edges,
//!   eigenvalue densities, mean purity, cumulants, generating function).
//! * [`haar`]: exact sampling of Haar-random states at `β = 0`.
//! * [`coulomb`]: a Metropolis sampler of the eigenvalue gas at any `β`.
//!
//! [`stats`] holds the estimators used to compare them.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coulomb;
pub mod error;
pub mod haar;
pub mod quad;
pub mod rng;
pub mod spectrum;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use spectrum::{purity, validate_simplex, BipartitionDims, PurityRecord, SchmidtSpectrum};
