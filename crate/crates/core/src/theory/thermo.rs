use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use super::support::{support_params, Phase};
use super::BETA_PLUS;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// `r(β) = N ⟨π⟩` in the large-`N` limit.
pub fn mean_purity_coeff(beta: f64) -> Result<f64> {
    let p = support_params(beta)?;
    Ok(match p.phase {
        Phase::HighTemp => (3.0 * beta * p.a.powi(4) + 16.0 * p.a * p.a) / 128.0,
        Phase::Semicircle => 1.0 + 0.5 / beta,
    })
}

/// `G(β) = -(1/N²) log ⟨e^{-βR}⟩ = ∫₀^β r`, anchored at `G(0) = 0`.
pub fn log_mgf(beta: f64) -> Result<f64> {
    support_params(beta)?;
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 500 };
    let r = |b: f64| mean_purity_coeff(b).unwrap_or(f64::NAN);
    // r'' jumps at β₊; integrate the two sides separately.
    if beta > BETA_PLUS {
        Ok(integrate(r, 0.0, BETA_PLUS, opts)?.value + integrate(r, BETA_PLUS, beta, opts)?.value)
    } else {
        Ok(integrate(r, 0.0, beta, opts)?.value)
    }
}

/// `s(β) - s(0) = β r(β) - G(β)`, the entropy per `N²` up to its constant.
pub fn entropy_rel(beta: f64) -> Result<f64> {
    Ok(beta * mean_purity_coeff(beta)? - log_mgf(beta)?)
}

/// Closed-form `F / N²` as printed for each phase.
///
/// Only differences and derivatives of this function are meaningful: the two
/// branches carry inconsistent additive constants in `βF`.
pub fn reported_free_energy(beta: f64) -> Result<f64> {
    let p = support_params(beta)?;
    match p.phase {
        Phase::HighTemp if beta == BETA_PLUS => Ok(semicircle_free_energy(beta)),
        Phase::HighTemp => {
            if beta == 0.0 {
                return Err(Error::DomainError("printed free energy is singular at beta=0".into()));
            }
            let a = p.a;
            Ok((6.0 - a) * a / 8.0 - (2.0 + a * (a / 4.0).ln()) / (a * beta) + 3.0 * a.powi(4) * beta / 256.0)
        }
        Phase::Semicircle => Ok(semicircle_free_energy(beta)),
    }
}

fn semicircle_free_energy(beta: f64) -> f64 {
    1.0 + 0.75 / beta + (2.0 * beta).ln() / (2.0 * beta)
}

/// `S / N² = β (r - F/N²)` from the printed free energy.
pub fn reported_entropy(beta: f64) -> Result<f64> {
    Ok(beta * (mean_purity_coeff(beta)? - reported_free_energy(beta)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryRow {
    pub beta: f64,
    pub phase: Phase,
    pub a: f64,
    /// `b` where defined, otherwise `c = βb` (at `β = 0`).
    pub b_or_c: f64,
    pub r: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub s_rel: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TheoryTable {
    pub rows: Vec<TheoryRow>,
    /// Grid points that could not be evaluated, with the reason.
    pub errors: Vec<(f64, Error)>,
}

fn row(beta: f64) -> Result<TheoryRow> {
    let p = support_params(beta)?;
    let r = mean_purity_coeff(beta)?;
    let g = log_mgf(beta)?;
    Ok(TheoryRow { beta, phase: p.phase, a: p.a, b_or_c: p.b.unwrap_or(p.c), r, g, s_rel: beta * r - g })
}

/// Evaluates the phase diagram on `betas`; failing points are collected, not fatal.
///
/// Only the balanced case `mu = 0` has an analytic phase diagram.
pub fn sweep(betas: &[f64], mu: Rational64) -> Result<TheoryTable> {
    if !mu.is_zero() {
        return Err(Error::DomainError(format!("analytic phase diagram is available only for mu=0 (got {mu})")));
    }
    let mut table = TheoryTable::default();
    for &beta in betas {
        match row(beta) {
            Ok(r) => table.rows.push(r),
            Err(e) => table.errors.push((beta, e)),
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::super::BETA_MINUS;
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn mean_purity_landmarks() {
        assert!((mean_purity_coeff(0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((mean_purity_coeff(2.0).unwrap() - 1.25).abs() < 1e-12);
        assert!((mean_purity_coeff(BETA_MINUS).unwrap() - 2.25).abs() < 1e-12);
        assert_eq!(mean_purity_coeff(4.0).unwrap(), 1.125);
    }

    #[test]
    fn printed_mean_purity_identity() {
        // β a³ (5a + 4b) / 128 with b = 4/(βa) - a/2.
        for k in 1..=200 {
            let beta = BETA_MINUS + (BETA_PLUS - BETA_MINUS) * k as f64 / 200.0;
            if beta.abs() < 1e-9 {
                continue;
            }
            let p = support_params(beta).unwrap();
            let b = 4.0 / (beta * p.a) - p.a / 2.0;
            let printed = beta * p.a.powi(3) * (5.0 * p.a + 4.0 * b) / 128.0;
            assert!((printed - mean_purity_coeff(beta).unwrap()).abs() < 1e-10, "beta={beta}");
        }
    }

    #[test]
    fn mean_purity_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 0..=2000 {
            let beta = BETA_MINUS + k as f64 * 0.01;
            let r = mean_purity_coeff(beta).unwrap();
            assert!(r < prev, "beta={beta}");
            prev = r;
        }
    }

    #[test]
    fn log_mgf_examples() {
        assert_eq!(log_mgf(0.0).unwrap(), 0.0);
        let g = |b: f64| log_mgf(b).unwrap();
        assert!((fd(g, 3.0, 1e-3) - 7.0 / 6.0).abs() < 1e-6);
        assert!((fd(g, -0.03, 1e-4) - mean_purity_coeff(-0.03).unwrap()).abs() < 1e-6);
        assert!(log_mgf(-0.1).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_rel(0.0).unwrap(), 0.0);
        let s = |b: f64| entropy_rel(b).unwrap();
        assert!((s(8.0) - s(2.0) + 2f64.ln()).abs() < 1e-6);
        let h = 1e-4;
        let left = (s(2.0) - s(2.0 - h)) / h;
        let right = (s(2.0 + h) - s(2.0)) / h;
        assert!((left + 0.25).abs() < 1e-4 && (right + 0.25).abs() < 1e-4, "{left} {right}");
    }

    #[test]
    fn reported_forms() {
        assert!((reported_entropy(2.0).unwrap() - (-0.25 - 2f64.ln())).abs() < 1e-12);
        assert!(reported_free_energy(0.0).is_err());
        let beta_f = |b: f64| b * reported_free_energy(b).unwrap();
        assert!((fd(beta_f, 4.0, 1e-4) - 1.125).abs() < 1e-6);
        assert!((fd(beta_f, 1.0, 1e-4) - mean_purity_coeff(1.0).unwrap()).abs() < 1e-6);
        assert!((fd(beta_f, -0.03, 1e-5) - mean_purity_coeff(-0.03).unwrap()).abs() < 1e-6);
        // Semicircle entropy closed form.
        for &b in &[2.5, 10.0] {
            let s = reported_entropy(b).unwrap();
            assert!((s - (-0.25 - 0.5 * (2.0 * b).ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_examples() {
        let zero = Rational64::from_integer(0);
        let t = sweep(&[BETA_MINUS, 0.0, BETA_PLUS], zero).unwrap();
        let r: Vec<f64> = t.rows.iter().map(|row| row.r).collect();
        for (got, want) in r.iter().zip([2.25, 2.0, 1.25]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(t.rows[1].b_or_c, 1.0);
        let t = sweep(&[50.0], zero).unwrap();
        assert!((t.rows[0].r - 1.01).abs() < 1e-15);
        assert!(sweep(&[], zero).unwrap().rows.is_empty());
        let t = sweep(&[-1.0, 1.0], zero).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.errors.len(), 1);
        assert!(sweep(&[0.0], Rational64::from_integer(1)).is_err());
    }
}
