//! Bipartition dimensions, Schmidt spectra and purity.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Dimensions `n = dim H_A <= m = dim H_B` of a bipartite Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartitionDims {
    n: usize,
    m: usize,
}

impl BipartitionDims {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDims("n must be at least 1".into()));
        }
        if m < n {
            return Err(Error::InvalidDims(format!("m={m} must be >= n={n}")));
        }
        if i64::try_from(m).is_err() {
            return Err(Error::InvalidDims(format!("m={m} too large")));
        }
        Ok(Self { n, m })
    }

    /// Balanced bipartition `n = m`.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    /// Dimensions with `m = n (1 + mu)`; fails unless `m` is a whole number.
    pub fn from_imbalance(n: usize, mu: Rational64) -> Result<Self> {
        if *mu.numer() < 0 {
            return Err(Error::InvalidDims(format!("mu={mu} must be >= 0")));
        }
        let m = (Rational64::from_integer(n as i64) * (Rational64::from_integer(1) + mu)).reduced();
        if !m.is_integer() {
            return Err(Error::InvalidDims(format!("m = n(1+mu) = {m} is not an integer for n={n}, mu={mu}")));
        }
        Self::new(n, *m.numer() as usize)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Imbalance `(m - n) / n`, exact.
    pub fn mu(&self) -> Rational64 {
        Rational64::new((self.m - self.n) as i64, self.n as i64)
    }
}

/// Eigenvalues of a reduced density matrix, sorted descending, on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtSpectrum {
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Simplex sum tolerance used for spectra of dimension `n`.
    pub fn tolerance(n: usize) -> f64 {
        1e-12 * n.max(1) as f64
    }

    /// Validates `values` with the dimension-scaled tolerance.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let tol = Self::tolerance(values.len());
        validate_simplex(values, tol)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// Eigenvalues multiplied by `n`, the scale on which the limiting density lives.
    pub fn rescaled(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n() as f64;
        self.values.iter().map(move |v| v * n)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Checks that `values` lie on the simplex within `tol` and returns them as a sorted spectrum.
///
/// Small negative entries (at least `-tol`) are clamped to zero and the vector is
/// renormalized, which absorbs eigensolver round-off.
pub fn validate_simplex(mut values: Vec<f64>, tol: f64) -> Result<SchmidtSpectrum> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::SpectrumInvalid(format!("non-finite eigenvalue {bad}")));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::SumOutOfTolerance { sum, tol });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::NegativeEigenvalue { value: min, tol });
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let sum: f64 = values.iter().sum();
    if sum != 1.0 {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    Ok(SchmidtSpectrum { values })
}

/// Purity `Tr ρ_A²` together with its rescaled form `n³ π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityRecord {
    pub purity: f64,
    pub rescaled: f64,
    pub n: usize,
}

impl PurityRecord {
    pub fn new(purity: f64, n: usize) -> Self {
        let n3 = (n as f64).powi(3);
        Self { purity, rescaled: n3 * purity, n }
    }
}

/// Sum of squared Schmidt coefficients.
pub fn purity(spectrum: &SchmidtSpectrum) -> Result<PurityRecord> {
    const SLACK: f64 = 1e-12;
    let n = spectrum.n();
    let p: f64 = spectrum.values.iter().map(|v| v * v).sum();
    let lo = 1.0 / n as f64;
    let p = if p < lo {
        if lo - p > SLACK {
            return Err(Error::SpectrumInvalid(format!("purity {p} below 1/n = {lo}")));
        }
        log::warn!("purity {p} below 1/n by {:e}; clamped", lo - p);
        lo
    } else if p > 1.0 {
        if p - 1.0 > SLACK {
            return Err(Error::SpectrumInvalid(format!("purity {p} above 1")));
        }
        log::warn!("purity {p} above 1 by {:e}; clamped", p - 1.0);
        1.0
    } else {
        p
    };
    Ok(PurityRecord::new(p, n))
}
