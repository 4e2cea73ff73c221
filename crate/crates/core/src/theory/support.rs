use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::{BETA_MINUS, BETA_PLUS};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// Below this `|β|` the right edge is evaluated from its power series.
const SERIES_CROSSOVER: f64 = 1e-3;
const SERIES_TERMS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    HighTemp,
    Semicircle,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::HighTemp => "high_temp",
            Phase::Semicircle => "semicircle",
        })
    }
}

/// Support parameters of the limiting eigenvalue density at one `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseParams {
    pub beta: f64,
    pub phase: Phase,
    /// Right support edge.
    pub a: f64,
    /// `β b`, finite at `β = 0`.
    pub c: f64,
    /// Left-edge parameter; `None` at `β = 0`.
    pub b: Option<f64>,
    /// `β (a - b)`, the imaginary part of the saddle-point Lagrange multiplier.
    pub xi_im: f64,
}

impl PhaseParams {
    /// Lower end of the support.
    pub fn lower_edge(&self) -> f64 {
        match self.phase {
            Phase::HighTemp => 0.0,
            Phase::Semicircle => self.b.expect("semicircle phase has b"),
        }
    }

    pub fn density(&self, lambda: f64) -> f64 {
        match self.phase {
            Phase::HighTemp => {
                if lambda <= 0.0 || lambda > self.a {
                    return 0.0;
                }
                (0.5 * self.c + self.beta * lambda) * ((self.a - lambda) / lambda).sqrt() / PI
            }
            Phase::Semicircle => {
                let b = self.lower_edge();
                if lambda < b || lambda > self.a {
                    return 0.0;
                }
                self.beta * ((lambda - b) * (self.a - lambda)).sqrt() / PI
            }
        }
    }

    // Maps t in [0, π/2] onto the support so that edge singularities cancel
    // against the Jacobian.
    fn angle_of(&self, lambda: f64) -> f64 {
        let lo = self.lower_edge();
        if lambda <= lo {
            return 0.0;
        }
        if lambda >= self.a {
            return 0.5 * PI;
        }
        ((lambda - lo) / (self.a - lo)).sqrt().asin()
    }

    fn lambda_of(&self, t: f64) -> f64 {
        let lo = self.lower_edge();
        lo + (self.a - lo) * t.sin().powi(2)
    }

    /// `ρ(λ(t)) dλ/dt`, smooth on `[0, π/2]`.
    fn weight_at_angle(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        match self.phase {
            Phase::HighTemp => {
                let lambda = self.a * s * s;
                2.0 * self.a * (0.5 * self.c + self.beta * lambda) * c * c / PI
            }
            Phase::Semicircle => {
                let w = self.a - self.lower_edge();
                2.0 * self.beta * w * w * s * s * c * c / PI
            }
        }
    }

    /// `∫ f(λ) ρ(λ) dλ` over the support, by adaptive quadrature in the angle variable.
    pub fn integrate_against<F: FnMut(f64) -> f64>(&self, mut f: F, opts: QuadOptions) -> Result<f64> {
        let est = integrate(|t| f(self.lambda_of(t)) * self.weight_at_angle(t), 0.0, 0.5 * PI, opts)?;
        Ok(est.value)
    }

    /// Cumulative distribution of the density, in closed form.
    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda >= self.a {
            return 1.0;
        }
        if lambda <= self.lower_edge() {
            return 0.0;
        }
        let t = self.angle_of(lambda);
        let quartic = t / 8.0 - (4.0 * t).sin() / 32.0;
        let value = match self.phase {
            Phase::HighTemp => {
                let quadratic = t / 2.0 + (2.0 * t).sin() / 4.0;
                2.0 * self.a / PI * (0.5 * self.c * quadratic + self.beta * self.a * quartic)
            }
            Phase::Semicircle => {
                let w = self.a - self.lower_edge();
                2.0 * self.beta * w * w / PI * quartic
            }
        };
        value.clamp(0.0, 1.0)
    }
}

/// Support parameters of the lowest-free-energy saddle at `beta`.
pub fn support_params(beta: f64) -> Result<PhaseParams> {
    if beta.is_nan() || beta < BETA_MINUS {
        return Err(Error::BelowBetaMinus { beta });
    }
    if beta > BETA_PLUS {
        let root = (BETA_PLUS / beta).sqrt();
        let a = 1.0 + root;
        let b = 1.0 - root;
        return Ok(PhaseParams { beta, phase: Phase::Semicircle, a, c: beta * b, b: Some(b), xi_im: beta * (a - b) });
    }
    // Both critical points have exact edges: a(β₋) = 6, a(β₊) = 2.
    let a = if beta == BETA_MINUS {
        6.0
    } else if beta == BETA_PLUS {
        2.0
    } else if beta.abs() < SERIES_CROSSOVER {
        series_a(beta, SERIES_TERMS)?
    } else if beta > 0.0 {
        let x = -beta / BETA_MINUS;
        let delta = (x.sqrt() + (1.0 + x).sqrt()).cbrt();
        (8.0 / (3.0 * beta)).sqrt() * (delta - 1.0 / delta)
    } else {
        // Δ has unit modulus here; a = 2 √(8/(3|β|)) sin(θ/3).
        let x = (beta / BETA_MINUS).min(1.0);
        let theta = x.sqrt().atan2((1.0 - x).sqrt());
        2.0 * (8.0 / (3.0 * beta.abs())).sqrt() * (theta / 3.0).sin()
    };
    let c = if beta == BETA_PLUS { 0.0 } else { 4.0 / a - beta * a / 2.0 };
    let b = (beta != 0.0).then(|| c / beta);
    Ok(PhaseParams { beta, phase: Phase::HighTemp, a, c, b, xi_im: beta * a - c })
}

/// Partial sum of the power series of the right edge `a(β)` around `β = 0`.
///
/// Coefficients follow `t₀ = 4`, `t_{l+1} = -6 (3l+2)(3l+1) / ((2l+3)(2l+2)) t_l`,
/// the ratio form of the closed factorial expression.
pub fn series_a(beta: f64, terms: usize) -> Result<f64> {
    let ratio = (beta / BETA_MINUS).abs();
    if !(ratio < 1.0) {
        return Err(Error::OutsideConvergence { ratio });
    }
    let mut coeff = 4.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for l in 0..terms.max(1) {
        sum += coeff * power;
        let lf = l as f64;
        coeff *= -6.0 * (3.0 * lf + 2.0) * (3.0 * lf + 1.0) / ((2.0 * lf + 3.0) * (2.0 * lf + 2.0));
        power *= beta;
    }
    Ok(sum)
}

/// Limiting density of rescaled eigenvalues at `beta`.
pub fn density(beta: f64, lambda: f64) -> Result<f64> {
    Ok(support_params(beta)?.density(lambda))
}

/// `(∫ρ, ∫λρ)` by quadrature; both equal one for a consistent solution.
pub fn density_moments(beta: f64) -> Result<(f64, f64)> {
    let params = support_params(beta)?;
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 500 };
    let norm = params.integrate_against(|_| 1.0, opts)?;
    let mean = params.integrate_against(|l| l, opts)?;
    Ok((norm, mean))
}
