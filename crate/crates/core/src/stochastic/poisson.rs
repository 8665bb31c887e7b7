//! Poisson count sampling, plain and truncated to `{0, …, v}`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    match Poisson::new(lambda) {
        Ok(p) => p.sample(rng) as u64,
        Err(_) => 0,
    }
}

/// Independent Poisson draws, one per intensity.
pub fn sample_poisson_vector<R: Rng + ?Sized>(lambda: &[f64], rng: &mut R) -> Vec<u64> {
    lambda.iter().map(|&l| sample_poisson(l, rng)).collect()
}

/// Unnormalised truncated-Poisson weights over `lo..=hi`, scaled so the
/// mode has weight 1. Terms below `1e-18` of the mode are dropped.
fn truncated_weights(lambda: f64, v: u64) -> (u64, Vec<f64>) {
    const CUTOFF: f64 = 1e-18;
    let mode = (lambda.floor() as u64).min(v);
    let mut below = Vec::new();
    let mut w = 1.0;
    let mut j = mode;
    while j > 0 {
        w *= j as f64 / lambda;
        if w < CUTOFF {
            break;
        }
        below.push(w);
        j -= 1;
    }
    let lo = mode - below.len() as u64;
    let mut weights: Vec<f64> = below.into_iter().rev().collect();
    weights.push(1.0);
    let mut w = 1.0;
    let mut j = mode;
    while j < v {
        w *= lambda / (j + 1) as f64;
        if w < CUTOFF {
            break;
        }
        weights.push(w);
        j += 1;
    }
    (lo, weights)
}

/// Probability mass of the Poisson law conditioned on `{0, …, v}`.
pub fn truncated_poisson_pmf(lambda: f64, v: u64) -> Vec<f64> {
    let mut pmf = vec![0.0; v as usize + 1];
    if !(lambda > 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    let (lo, weights) = truncated_weights(lambda, v);
    let total: f64 = weights.iter().sum();
    for (k, w) in weights.iter().enumerate() {
        pmf[lo as usize + k] = w / total;
    }
    pmf
}

/// Inverse-CDF draw from Poisson(λ) conditioned on `{0, …, v}`.
///
/// Consumes exactly one uniform per call, so draws sharing a random stream
/// are monotone in `λ`.
pub fn sample_truncated_poisson<R: Rng + ?Sized>(lambda: f64, v: u64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    if v == 0 || !(lambda > 0.0) {
        return 0;
    }
    let (lo, weights) = truncated_weights(lambda, v);
    let target = u * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if acc > target {
            return lo + k as u64;
        }
    }
    lo + weights.len() as u64 - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn zero_intensity() {
        let mut rng = stream(1);
        assert_eq!(sample_poisson_vector(&[0.0, 0.0], &mut rng), vec![0, 0]);
        assert_eq!(sample_truncated_poisson(0.0, 5, &mut rng), 0);
    }

    #[test]
    fn poisson_moments() {
        let mut rng = stream(2);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_poisson(5.0, &mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 5.0).abs() < 3.0 * (5.0 / n as f64).sqrt());
        // Var of the sample variance for Poisson: (μ4 - σ^4)/n with μ4 = λ + 3λ^2
        assert!((var - 5.0).abs() < 3.0 * ((5.0 + 75.0 - 25.0) / n as f64).sqrt());
    }

    #[test]
    fn poisson_components_uncorrelated() {
        let mut rng = stream(3);
        let n = 100_000;
        let lam = [1.0, 2.0, 3.0];
        let draws: Vec<Vec<u64>> = (0..n).map(|_| sample_poisson_vector(&lam, &mut rng)).collect();
        for a in 0..3 {
            for b in (a + 1)..3 {
                let cov = draws
                    .iter()
                    .map(|d| (d[a] as f64 - lam[a]) * (d[b] as f64 - lam[b]))
                    .sum::<f64>()
                    / n as f64;
                let corr = cov / (lam[a] * lam[b]).sqrt();
                assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "corr {corr}");
            }
        }
    }

    #[test]
    fn truncated_pmf_small_support() {
        let pmf = truncated_poisson_pmf(2.0, 3);
        let oracle = [3.0 / 19.0, 6.0 / 19.0, 6.0 / 19.0, 4.0 / 19.0];
        for (p, o) in pmf.iter().zip(oracle) {
            assert!((p - o).abs() < 1e-15);
        }
        let mut rng = stream(4);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_truncated_poisson(2.0, 3, &mut rng) as usize] += 1;
        }
        for (c, o) in counts.iter().zip(oracle) {
            let f = *c as f64 / n as f64;
            assert!((f - o).abs() < 3.0 * (o * (1.0 - o) / n as f64).sqrt());
        }
    }

    #[test]
    fn truncation_inactive_for_large_support() {
        let mut rng = stream(5);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_truncated_poisson(2.0, 1000, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn single_point_support() {
        let mut rng = stream(6);
        assert!((0..1000).all(|_| sample_truncated_poisson(50.0, 0, &mut rng) == 0));
    }

    #[test]
    fn large_intensity_is_stable() {
        let pmf = truncated_poisson_pmf(5000.0, 10_000);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let pmf = truncated_poisson_pmf(5000.0, 10);
        assert!(pmf[10] > 0.99);
    }

    #[test]
    fn shared_uniform_is_monotone_in_intensity() {
        for seed in 0..200 {
            let a = sample_truncated_poisson(1.5, 30, &mut stream(seed));
            let b = sample_truncated_poisson(3.5, 30, &mut stream(seed));
            assert!(a <= b);
        }
    }
}
