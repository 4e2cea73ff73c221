//! Exact purity cumulants and the Taylor series of the mean purity.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn big(mu: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*mu.numer()), BigInt::from(*mu.denom()))
}

/// Coefficient of `β^l` in the power series of the right edge `a(β)`.
///
/// Evaluates `4^{l+1} 3^{1-3l} (3l-1)! / ((2l+1)! (l-1)!)` times `β₋^{-l}`;
/// at `l = 0` the factorial ratio is read as its Γ-function limit `1/3`,
/// giving `4`.
pub fn series_a_coefficient(l: u32) -> BigRational {
    if l == 0 {
        return int(4);
    }
    let l = u64::from(l);
    let four_pow = BigInt::from(4).pow((l + 1) as u32);
    let three_exp = 1i64 - 3 * l as i64;
    let num = four_pow * factorial(3 * l - 1);
    let den = factorial(2 * l + 1) * factorial(l - 1);
    let mut coeff = BigRational::new(num, den);
    let three = int(3);
    for _ in 0..three_exp.unsigned_abs() {
        if three_exp > 0 {
            coeff *= &three;
        } else {
            coeff /= &three;
        }
    }
    // (1/β₋)^l = (-27/2)^l
    let inv_beta_minus = BigRational::new(BigInt::from(-27), BigInt::from(2));
    let mut scale = BigRational::one();
    for _ in 0..l {
        scale *= &inv_beta_minus;
    }
    coeff * scale
}

fn cauchy(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let len = a.len().min(b.len());
    (0..len).map(|k| (0..=k).fold(BigRational::zero(), |acc, i| acc + &a[i] * &b[k - i])).collect()
}

/// Taylor coefficients `r_0..=r_order` of `r(β) = (3β a⁴ + 16 a²) / 128`, exactly.
pub fn purity_taylor_exact(order: usize) -> Vec<BigRational> {
    let a: Vec<BigRational> = (0..=order as u32).map(series_a_coefficient).collect();
    let a2 = cauchy(&a, &a);
    let a4 = cauchy(&a2, &a2);
    (0..=order)
        .map(|k| {
            let mut r = int(16) * &a2[k];
            if k > 0 {
                r += int(3) * &a4[k - 1];
            }
            r / int(128)
        })
        .collect()
}

/// Taylor coefficients of `r(β)` at zero, as floats.
pub fn purity_taylor(order: usize) -> Vec<f64> {
    purity_taylor_exact(order).iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}

/// `n`-th purity cumulant coefficient implied by the Taylor series of `r`:
/// `(-1)^{n+1} (n-1)! r_{n-1}` (the cumulant is this over `N^{3n-2}`).
pub fn cumulant_from_taylor(n: u32) -> BigRational {
    assert!(n >= 1, "cumulant order starts at 1");
    let taylor = purity_taylor_exact(n as usize - 1);
    let value = BigRational::from_integer(factorial(u64::from(n) - 1)) * &taylor[n as usize - 1];
    if n.is_multiple_of(2) {
        -value
    } else {
        value
    }
}

/// Balanced (`μ = 0`) cumulant `2^{n+1} (3n-3)! / (2n)!`, with power `3n - 2`.
pub fn balanced_cumulant(n: u32) -> Result<(BigRational, u32)> {
    if n == 0 {
        return Err(Error::UnsupportedOrder { order: 0, mu: "0".into() });
    }
    let k = u64::from(n);
    let coeff = BigRational::new(BigInt::from(2).pow(n + 1) * factorial(3 * k - 3), factorial(2 * k));
    Ok((coeff, 3 * n - 2))
}

/// First five cumulants for an unbalanced bipartition with imbalance `mu`.
pub fn unbalanced_cumulant(n: u32, mu: Rational64) -> Result<(BigRational, u32)> {
    let m = big(mu);
    let one_plus = int(1) + &m;
    let pow = |k: u32| {
        let mut p = BigRational::one();
        for _ in 0..k {
            p *= &one_plus;
        }
        p
    };
    let poly = |cs: &[i64]| cs.iter().rev().fold(BigRational::zero(), |acc, &c| acc * &m + int(c));
    let coeff = match n {
        1 => poly(&[2, 1]) / pow(1),
        2 => int(2) / pow(2),
        3 => int(8) * poly(&[2, 1]) / pow(4),
        4 => int(48) * poly(&[6, 6, 1]) / pow(6),
        5 => int(384) * poly(&[22, 33, 13, 1]) / pow(8),
        _ => return Err(Error::UnsupportedOrder { order: n, mu: mu.to_string() }),
    };
    Ok((coeff, 3 * n - 2))
}

/// Exact cumulant `coefficient / N^{power}` of the purity at `β = 0`.
pub fn cumulant_exact(n: u32, mu: Rational64) -> Result<(BigRational, u32)> {
    if mu.is_negative() {
        return Err(Error::DomainError(format!("mu={mu} must be >= 0")));
    }
    if mu.is_zero() {
        balanced_cumulant(n)
    } else {
        unbalanced_cumulant(n, mu)
    }
}

/// Exact cumulants of orders `1..=max_order` at imbalance `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSet {
    pub entries: BTreeMap<u32, (BigRational, u32)>,
    pub mu: Rational64,
}

impl CumulantSet {
    pub fn exact(mu: Rational64, max_order: u32) -> Result<Self> {
        let entries = (1..=max_order).map(|k| cumulant_exact(k, mu).map(|e| (k, e))).collect::<Result<_>>()?;
        Ok(Self { entries, mu })
    }

    /// Numerical value of the order-`order` cumulant at subsystem dimension `n`.
    pub fn value(&self, order: u32, n: usize) -> Option<f64> {
        let (coeff, power) = self.entries.get(&order)?;
        Some(coeff.to_f64()? / (n as f64).powi(*power as i32))
    }
}

/// Serializable view used in summaries.
#[derive(Debug, Clone, Serialize)]
pub struct CumulantEntry {
    pub order: u32,
    pub coefficient: String,
    pub n_power: u32,
}

impl CumulantSet {
    pub fn to_entries(&self) -> Vec<CumulantEntry> {
        self.entries
            .iter()
            .map(|(&order, (c, p))| CumulantEntry { order, coefficient: c.to_string(), n_power: *p })
            .collect()
    }
}
