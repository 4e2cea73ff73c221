//! Cumulant estimators, histograms and distribution distances.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Blocks used for jackknife errors on independent samples.
pub const DEFAULT_BLOCKS: usize = 100;
/// Fewest blocks a jackknife is run with.
pub const MIN_BLOCKS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KStat {
    pub estimate: f64,
    /// Blocked delete-1 jackknife error; `None` when replicates are too small.
    pub std_error: Option<f64>,
    /// Set for order 5, whose estimate is dominated by noise at desk-scale sample sizes.
    pub high_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub k_stats: BTreeMap<u32, KStat>,
    pub blocks: usize,
}

impl SampleSummary {
    pub fn k(&self, order: u32) -> Option<&KStat> {
        self.k_stats.get(&order)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PowerSums {
    count: f64,
    s: [f64; 5],
}

impl PowerSums {
    fn add(&mut self, x: f64) {
        self.count += 1.0;
        let mut p = 1.0;
        for s in self.s.iter_mut() {
            p *= x;
            *s += p;
        }
    }

    fn minus(&self, other: &PowerSums) -> PowerSums {
        let mut out = *self;
        out.count -= other.count;
        for (a, b) in out.s.iter_mut().zip(other.s.iter()) {
            *a -= b;
        }
        out
    }

    fn merge(&mut self, other: &PowerSums) {
        self.count += other.count;
        for (a, b) in self.s.iter_mut().zip(other.s.iter()) {
            *a += b;
        }
    }

    /// Unbiased k-statistic of `order` (>= 2) from raw power sums.
    fn k(&self, order: u32) -> f64 {
        let n = self.count;
        let [s1, s2, s3, s4, s5] = self.s;
        match order {
            2 => (s2 - s1 * s1 / n) / (n - 1.0),
            3 => (n * s3 - 3.0 * s2 * s1 + 2.0 * s1.powi(3) / n) / ((n - 1.0) * (n - 2.0)),
            4 => {
                (n * (n + 1.0) * s4 - 4.0 * (n + 1.0) * s3 * s1 - 3.0 * (n - 1.0) * s2 * s2 + 12.0 * s2 * s1 * s1
                    - 6.0 * s1.powi(4) / n)
                    / ((n - 1.0) * (n - 2.0) * (n - 3.0))
            }
            5 => {
                (n * n * (n + 5.0) * s5 - 5.0 * n * (n + 5.0) * s4 * s1 - 10.0 * n * (n - 1.0) * s3 * s2
                    + 20.0 * (n + 2.0) * s3 * s1 * s1
                    + 30.0 * (n - 1.0) * s2 * s2 * s1
                    - 60.0 * s2 * s1.powi(3)
                    + 24.0 * s1.powi(5) / n)
                    / ((n - 1.0) * (n - 2.0) * (n - 3.0) * (n - 4.0))
            }
            _ => unreachable!("k-statistics implemented for orders 2..=5"),
        }
    }
}

/// Unbiased k-statistics `k₁..=k_max_order` with jackknife errors over
/// [`DEFAULT_BLOCKS`] blocks (fewer only when there are fewer samples).
pub fn k_statistics(samples: &[f64], max_order: u32) -> Result<SampleSummary> {
    k_statistics_blocked(samples, max_order, samples.len().min(DEFAULT_BLOCKS))
}

/// k-statistics for an autocorrelated series: blocks span `10 τ` samples,
/// with at least [`MIN_BLOCKS`] blocks.
pub fn k_statistics_correlated(samples: &[f64], max_order: u32, tau: f64) -> Result<SampleSummary> {
    let block_len = (10.0 * tau).ceil().max(1.0) as usize;
    let blocks = (samples.len() / block_len).max(MIN_BLOCKS).min(samples.len());
    k_statistics_blocked(samples, max_order, blocks)
}

/// k-statistics with a delete-1 jackknife over `blocks` contiguous blocks.
pub fn k_statistics_blocked(samples: &[f64], max_order: u32, blocks: usize) -> Result<SampleSummary> {
    if !(1..=5).contains(&max_order) {
        return Err(Error::DomainError(format!("max_order {max_order} must be in 1..=5")));
    }
    let min = max_order as usize + 1;
    if samples.len() < min {
        return Err(Error::TooFewSamples { count: samples.len(), order: max_order, min });
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let blocks = blocks.clamp(1, n);

    let mut block_sums = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let (lo, hi) = (b * n / blocks, (b + 1) * n / blocks);
        let mut ps = PowerSums::default();
        for &x in &samples[lo..hi] {
            ps.add(x - mean);
        }
        block_sums.push(ps);
    }
    let mut total = PowerSums::default();
    for ps in &block_sums {
        total.merge(ps);
    }

    let mut k_stats = BTreeMap::new();
    for order in 1..=max_order {
        let estimate = if order == 1 { mean } else { total.k(order) };
        let replicate = |ps: &PowerSums| {
            if order == 1 {
                ps.s[0] / ps.count
            } else {
                ps.k(order)
            }
        };
        let std_error = if blocks >= 2 && n - n.div_ceil(blocks) > order as usize {
            let reps: Vec<f64> = block_sums.iter().map(|b| replicate(&total.minus(b))).collect();
            let avg = reps.iter().sum::<f64>() / blocks as f64;
            let var = reps.iter().map(|r| (r - avg).powi(2)).sum::<f64>();
            Some((var * (blocks as f64 - 1.0) / blocks as f64).sqrt())
        } else {
            None
        };
        k_stats.insert(order, KStat { estimate, std_error, high_variance: order == 5 });
    }
    Ok(SampleSummary { count: n, mean, k_stats, blocks })
}

/// Normalized histogram of rescaled eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDensity {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Observations that fell inside the range.
    pub count: usize,
    pub out_of_range: usize,
}

impl EmpiricalDensity {
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges.windows(2).zip(&self.densities).map(|(w, &d)| (w[0], w[1], d))
    }

    pub fn integral(&self) -> f64 {
        self.bins().map(|(lo, hi, d)| d * (hi - lo)).sum()
    }
}

/// Histogram with `bins` equal bins on `range`; values outside are counted, not binned.
pub fn empirical_density(values: &[f64], bins: usize, range: (f64, f64)) -> Result<EmpiricalDensity> {
    let (lo, hi) = range;
    if bins < 2 {
        return Err(Error::DomainError(format!("need at least 2 bins, got {bins}")));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DomainError(format!("invalid range ({lo}, {hi})")));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut out_of_range = 0;
    for &v in values {
        if !(lo..=hi).contains(&v) {
            out_of_range += 1;
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let count = values.len() - out_of_range;
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let densities =
        counts.iter().zip(edges.windows(2)).map(|(&c, w)| c as f64 / (count as f64 * (w[1] - w[0]))).collect();
    Ok(EmpiricalDensity { edges, densities, count, out_of_range })
}

/// `Σ |density - f(midpoint)| · width` over the histogram bins.
pub fn l1_distance<F: Fn(f64) -> f64>(empirical: &EmpiricalDensity, analytic: F) -> f64 {
    empirical.bins().map(|(lo, hi, d)| (d - analytic(0.5 * (lo + hi))).abs() * (hi - lo)).sum()
}

/// L1 distance against the exact per-bin average `(F(hi) - F(lo)) / width` of
/// an analytic CDF; free of the midpoint bias at integrable edge singularities.
pub fn l1_distance_cdf<F: Fn(f64) -> f64>(empirical: &EmpiricalDensity, cdf: F) -> f64 {
    empirical.bins().map(|(lo, hi, d)| (d * (hi - lo) - (cdf(hi) - cdf(lo))).abs()).sum()
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_against_cdf<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let v = sorted(values);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0f64, |sup, (k, &x)| {
        let f = cdf(x);
        sup.max(f - k as f64 / n).max((k + 1) as f64 / n - f)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn small_sample_examples() {
        let s = k_statistics(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(s.k(1).unwrap().estimate, 2.0);
        assert!((s.k(2).unwrap().estimate - 1.0).abs() < 1e-15);
        let s = k_statistics(&[1.0, 2.0, 3.0, 4.0], 3).unwrap();
        assert!(s.k(3).unwrap().estimate.abs() < 1e-15);
        assert!(matches!(k_statistics(&[1.0, 2.0, 3.0], 3), Err(Error::TooFewSamples { .. })));
        assert!(k_statistics(&[1.0; 10], 6).is_err());
        assert_eq!(k_statistics(&[0.5, 0.25, 0.125], 1).unwrap().k(1).unwrap().estimate, 0.875 / 3.0);
    }

    #[test]
    fn k1_is_mean_exactly() {
        let xs: Vec<f64> = (0..37).map(|k| (k as f64 * 0.37).sin()).collect();
        let s = k_statistics(&xs, 4).unwrap();
        assert_eq!(s.k(1).unwrap().estimate, s.mean);
        assert_eq!(s.mean, xs.iter().sum::<f64>() / 37.0);
    }

    #[test]
    fn exponential_cumulants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..1_000_000).map(|_| Exp1.sample(&mut rng)).collect();
        let s = k_statistics(&xs, 4).unwrap();
        for (order, want) in [(1, 1.0), (2, 1.0), (3, 2.0)] {
            let k = s.k(order).unwrap();
            let se = k.std_error.unwrap();
            assert!((k.estimate - want).abs() < 3.0 * se, "k{order} = {} ± {se}", k.estimate);
        }
    }

    fn population_cumulants(pop: &[f64]) -> [f64; 5] {
        let n = pop.len() as f64;
        let mean = pop.iter().sum::<f64>() / n;
        let m = |r: i32| pop.iter().map(|x| (x - mean).powi(r)).sum::<f64>() / n;
        let (m2, m3, m4, m5) = (m(2), m(3), m(4), m(5));
        [mean, m2, m3, m4 - 3.0 * m2 * m2, m5 - 10.0 * m3 * m2]
    }

    #[test]
    fn unbiased_over_all_iid_tuples() {
        // Averaging over every ordered tuple drawn with replacement is the exact
        // expectation under iid sampling from the population.
        let pop = [0.0, 1.0, 1.0, 3.0, 7.0, 2.5];
        let kappa = population_cumulants(&pop);
        let size = 6usize;
        let p = pop.len();
        let mut sums = [0.0f64; 5];
        let mut total = 0usize;
        let mut idx = vec![0usize; size];
        loop {
            let sample: Vec<f64> = idx.iter().map(|&i| pop[i]).collect();
            let mut ps = PowerSums::default();
            let mean = sample.iter().sum::<f64>() / size as f64;
            for &x in &sample {
                ps.add(x);
            }
            sums[0] += mean;
            for order in 2..=5 {
                sums[order as usize - 1] += ps.k(order);
            }
            total += 1;
            let mut pos = 0;
            loop {
                idx[pos] += 1;
                if idx[pos] < p {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
                if pos == size {
                    break;
                }
            }
            if pos == size {
                break;
            }
        }
        for r in 0..5 {
            let avg = sums[r] / total as f64;
            assert!((avg - kappa[r]).abs() < 1e-9 * (1.0 + kappa[r].abs()), "order {}: {avg} vs {}", r + 1, kappa[r]);
        }
    }

    fn subsets(p: usize, m: usize) -> Vec<Vec<usize>> {
        (0u32..(1 << p))
            .filter(|mask| mask.count_ones() as usize == m)
            .map(|mask| (0..p).filter(|i| mask & (1 << i) != 0).collect())
            .collect()
    }

    #[test]
    fn inherited_over_all_subsets() {
        // Without replacement, the subsample average equals the population k-statistic.
        let pop = [0.5, -1.0, 2.0, 4.0, 4.5, 8.0, -3.0, 1.0];
        let mut full = PowerSums::default();
        for &x in &pop {
            full.add(x);
        }
        for m in 5..=7 {
            let subs = subsets(pop.len(), m);
            for order in 2..=4 {
                let avg = subs
                    .iter()
                    .map(|s| {
                        let mut ps = PowerSums::default();
                        s.iter().for_each(|&i| ps.add(pop[i]));
                        ps.k(order)
                    })
                    .sum::<f64>()
                    / subs.len() as f64;
                assert!((avg - full.k(order)).abs() < 1e-9 * (1.0 + avg.abs()), "m={m} order={order}");
            }
        }
    }

    #[test]
    fn histogram_examples() {
        let h = empirical_density(&[0.5, 1.5], 2, (0.0, 2.0)).unwrap();
        assert_eq!(h.densities, vec![0.5, 0.5]);
        assert_eq!(h.integral(), 1.0);
        let h = empirical_density(&[0.5, 1.5, 9.0, 2.0], 4, (0.0, 2.0)).unwrap();
        assert_eq!((h.count, h.out_of_range), (3, 1));
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!(matches!(empirical_density(&[], 4, (0.0, 1.0)), Err(Error::EmptyInput)));
        assert!(empirical_density(&[1.0], 1, (0.0, 1.0)).is_err());
        assert!(empirical_density(&[1.0], 4, (1.0, 1.0)).is_err());
    }

    #[test]
    fn uniform_histogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random_range(0.0..4.0)).collect();
        let h = empirical_density(&xs, 40, (0.0, 4.0)).unwrap();
        assert!((h.integral() - 1.0).abs() < 1e-12);
        for &d in &h.densities {
            assert!((d - 0.25).abs() < 0.05 * 0.25, "{d}");
        }
    }

    #[test]
    fn l1_examples() {
        let xs: Vec<f64> = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).collect();
        let h = empirical_density(&xs, 10, (0.0, 1.0)).unwrap();
        assert!(l1_distance(&h, |_| 1.0) < 1e-12);
        assert!((l1_distance(&h, |l| 2.0 * l) - 0.5).abs() < 0.05);
        let d = h.densities.clone();
        let h2 = h.clone();
        let lookup = |l: f64| d[((l * 10.0) as usize).min(9)];
        assert_eq!(l1_distance(&h2, lookup), 0.0);
        // Exact cell averages of 2λ: |0.1 - (hi² - lo²)| summed gives 0.5 too.
        assert!((l1_distance_cdf(&h, |l| l * l) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn l1_shrinks_with_samples() {
        let draw = |n: usize, seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // density 2λ on (0, 1) by inversion
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>().sqrt()).collect();
            l1_distance(&empirical_density(&xs, 40, (0.0, 1.0)).unwrap(), |l| 2.0 * l)
        };
        let small: f64 = (0..5).map(|s| draw(1_000, s)).sum::<f64>() / 5.0;
        let large: f64 = (0..5).map(|s| draw(100_000, s + 100)).sum::<f64>() / 5.0;
        assert!(large < small, "{large} !< {small}");
    }

    #[test]
    fn ks_examples() {
        let a = [0.3, 0.1, 0.7];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0], &[2.0]).unwrap(), 1.0);
        assert!(matches!(ks_two_sample(&[], &[1.0]), Err(Error::EmptyInput)));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let v: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        assert!(ks_two_sample(&u, &v).unwrap() < 0.03);
        assert!(ks_against_cdf(&u, |x| x.clamp(0.0, 1.0)).unwrap() < 0.02);
        assert_eq!(ks_against_cdf(&[0.5], |x| x).unwrap(), 0.5);
    }

    #[test]
    fn ks_handles_ties() {
        assert_eq!(ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap(), 1.0 / 3.0);
    }
}
