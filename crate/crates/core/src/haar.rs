//! Haar-random bipartite pure states.
//!
//! A state is drawn as an `n × m` matrix of iid standard complex Gaussians
//! normalized to unit Frobenius norm, which is distributed as the coefficient
//! matrix of a Haar-random vector. The reduced density matrix is `X X†`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{partition, substream};
use crate::spectrum::{purity, BipartitionDims, PurityRecord, SchmidtSpectrum};
use crate::stats::{k_statistics, SampleSummary};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    dims: BipartitionDims,
    entries: DMatrix<C64>,
}

impl StateMatrix {
    /// Wraps a coefficient matrix; rows index subsystem A.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let dims = BipartitionDims::new(entries.nrows(), entries.ncols())?;
        let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::DomainError(format!("state norm² {norm} differs from 1")));
        }
        Ok(Self { dims, entries })
    }

    pub fn dims(&self) -> BipartitionDims {
        self.dims
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

/// Draws one Haar-random state.
pub fn sample_state<R: Rng + ?Sized>(dims: BipartitionDims, rng: &mut R) -> StateMatrix {
    let (n, m) = (dims.n(), dims.m());
    let mut entries = DMatrix::<C64>::from_fn(n, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    entries.unscale_mut(norm);
    StateMatrix { dims, entries }
}

/// Schmidt spectrum from the eigenvalues of the `n × n` Gram matrix `X X†`.
pub fn reduced_spectrum(state: &StateMatrix) -> Result<SchmidtSpectrum> {
    let x = &state.entries;
    let gram = x * x.adjoint();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(gram, f64::EPSILON, 10_000).ok_or(Error::EigensolverFailure)?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let trace: f64 = values.iter().sum();
    if !(trace > 0.0) {
        return Err(Error::EigensolverFailure);
    }
    SchmidtSpectrum::new(values.into_iter().map(|v| v / trace).collect())
}

/// Schmidt spectra of `count` states, split over `chains` reproducible sub-streams.
///
/// The result depends only on `(dims, count, seed, chains)`, not on the thread count.
pub fn sample_spectra(dims: BipartitionDims, count: usize, seed: u64, chains: usize) -> Result<Vec<SchmidtSpectrum>> {
    let sizes = partition(count, chains);
    let per_chain: Vec<Result<Vec<SchmidtSpectrum>>> = sizes
        .par_iter()
        .enumerate()
        .map(|(k, &size)| {
            let mut rng = substream(seed, k as u64);
            (0..size).map(|_| reduced_spectrum(&sample_state(dims, &mut rng))).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for chunk in per_chain {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Purities of `count` Haar states with their k-statistic summary (orders 1 to 4).
pub fn purity_batch(
    dims: BipartitionDims,
    count: usize,
    seed: u64,
    chains: usize,
) -> Result<(Vec<PurityRecord>, SampleSummary)> {
    if count == 0 {
        return Err(Error::DomainError("count must be at least 1".into()));
    }
    let records = sample_spectra(dims, count, seed, chains)?.iter().map(purity).collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = records.iter().map(|r| r.purity).collect();
    let order = 4.min(values.len().saturating_sub(1)).max(1) as u32;
    let summary = k_statistics(&values, order).or_else(|_| {
        // A single sample has a mean and nothing else.
        Ok::<_, Error>(SampleSummary {
            count: 1,
            mean: values[0],
            k_stats: [(1, crate::stats::KStat { estimate: values[0], std_error: None, high_variance: false })]
                .into_iter()
                .collect(),
            blocks: 1,
        })
    })?;
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn state(rows: &[&[f64]]) -> StateMatrix {
        let n = rows.len();
        let m = rows[0].len();
        StateMatrix::new(DMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))).unwrap()
    }

    #[test]
    fn one_by_one_has_unit_modulus() {
        let dims = BipartitionDims::square(1).unwrap();
        let s = sample_state(dims, &mut substream(9, 0));
        assert!((s.entries()[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_state() {
        let dims = BipartitionDims::square(2).unwrap();
        let a = sample_state(dims, &mut substream(4, 0));
        let b = sample_state(dims, &mut substream(4, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn product_and_bell_states() {
        let s = reduced_spectrum(&state(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-15 && s.values()[1].abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = reduced_spectrum(&state(&[&[h, 0.0], &[0.0, h]])).unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-15 && (s.values()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let m = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(StateMatrix::new(m).is_err());
    }

    #[test]
    fn spectrum_matches_singular_values() {
        let mut rng = substream(21, 3);
        for dims in [BipartitionDims::square(3).unwrap(), BipartitionDims::new(3, 7).unwrap()] {
            let s = sample_state(dims, &mut rng);
            let spectrum = reduced_spectrum(&s).unwrap();
            let mut sv: Vec<f64> =
                s.entries().clone().svd(false, false).singular_values.iter().map(|x| x * x).collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in spectrum.values().iter().zip(&sv) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn row_weight_is_one_over_n() {
        // Σ_j |X_1j|² has mean 1/n by unitary invariance.
        let dims = BipartitionDims::square(4).unwrap();
        let mut rng = substream(77, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                let s = sample_state(dims, &mut rng);
                s.entries().row(0).iter().map(|z| z.norm_sqr()).sum()
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (var / xs.len() as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn qubit_pair_mean_purity() {
        // Exact Haar mean (n+m)/(nm+1) = 4/5 at n = m = 2.
        let dims = BipartitionDims::square(2).unwrap();
        let (_, summary) = purity_batch(dims, 100_000, 12, 4).unwrap();
        let k1 = summary.k(1).unwrap();
        assert!((k1.estimate - 0.8).abs() < 3.0 * k1.std_error.unwrap(), "{:?}", k1);
    }

    #[test]
    fn batch_is_deterministic_and_bounded() {
        let dims = BipartitionDims::new(3, 5).unwrap();
        let (a, _) = purity_batch(dims, 50, 1, 3).unwrap();
        let (b, _) = purity_batch(dims, 50, 1, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for r in &a {
            assert!(r.purity >= 1.0 / 3.0 && r.purity <= 1.0);
        }
        let (one, s) = purity_batch(dims, 1, 1, 3).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(s.mean, one[0].purity);
        assert!(purity_batch(dims, 0, 1, 1).is_err());
    }
}
