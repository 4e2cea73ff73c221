use serde::Serialize;

use super::CoulombChainState;
use crate::error::{Error, Result};
use crate::theory::PhaseParams;

/// Shortest series accepted by [`autocorrelation_time`].
pub const MIN_SERIES: usize = 100;
/// Window factor `c` in `W >= c τ(W)`.
const WINDOW_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutocorrTime {
    /// Integrated autocorrelation time, `1/2 + Σ_{t=1}^{W} ρ(t)`, at least `1/2`.
    pub tau: f64,
    pub window: usize,
    /// False when no window up to half the series length satisfied the criterion.
    pub converged: bool,
    pub zero_variance: bool,
}

/// Integrated autocorrelation time with self-consistent windowing: the
/// window is the smallest `W` with `W >= 5 τ(W)`.
pub fn autocorrelation_time(series: &[f64]) -> Result<AutocorrTime> {
    let len = series.len();
    if len < MIN_SERIES {
        return Err(Error::SeriesTooShort { len, min: MIN_SERIES });
    }
    let mean = series.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / len as f64;
    if !(c0 > 0.0) {
        return Ok(AutocorrTime { tau: 0.5, window: 0, converged: true, zero_variance: true });
    }
    let mut tau = 0.5;
    for w in 1..=len / 2 {
        let ct = centered[..len - w].iter().zip(&centered[w..]).map(|(a, b)| a * b).sum::<f64>() / len as f64;
        tau += ct / c0;
        if w as f64 >= WINDOW_FACTOR * tau {
            return Ok(AutocorrTime { tau: tau.max(0.5), window: w, converged: true, zero_variance: false });
        }
    }
    Ok(AutocorrTime { tau: tau.max(0.5), window: len / 2, converged: false, zero_variance: false })
}

/// True when the largest rescaled eigenvalue `n max λ` exceeds twice the
/// analytic right edge. Only meaningful for `β < 0`; inert otherwise.
pub fn evaporation_monitor(state: &CoulombChainState, params: &PhaseParams) -> bool {
    if state.beta() >= 0.0 {
        return false;
    }
    escaped(state.n(), state.max_lambda(), params.a)
}

fn escaped(n: usize, max_lambda: f64, edge: f64) -> bool {
    n as f64 * max_lambda > 2.0 * edge
}
