//! Locale-free number formatting and parsing shared by all writers.

use num_rational::Rational64;
use serde_json::{Number, Value};

use crate::error::{CliError, CliResult};

/// Shortest round-trip decimal form; never uses exponents or locale separators.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// JSON number that prints whole values without a fractional part.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.007_199_254_740_992e15 {
        Value::Number(Number::from(x as i64))
    } else {
        Number::from_f64(x).map_or(Value::Null, Value::Number)
    }
}

/// Parses `3`, `1/2` or `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> CliResult<Rational64> {
    let bad = || CliError::Usage(format!("cannot parse '{s}' as a rational number"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let part: i64 = frac.parse().map_err(|_| bad())?;
        let value = whole.checked_mul(den).ok_or_else(bad)?;
        let num = if negative { value - part } else { value + part };
        return Ok(Rational64::new(num, den));
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}
