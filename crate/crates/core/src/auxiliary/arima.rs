//! ARIMA(0,1,1) with drift: `Δy_t = c + e_t + θ e_{t-1}`.

use serde::{Deserialize, Serialize};

use super::optim::{minimize, BfgsOptions};
use super::pooling::{group_series, Group};
use crate::error::{Error, Result};

const MIN_LEN: usize = 50;
const THETA_CAP: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub theta: f64,
    /// Log of the innovation standard deviation.
    pub log_sigma: f64,
    pub intercept: f64,
    pub loglik: f64,
    pub converged: bool,
    pub at_boundary: bool,
}

fn theta_of(z: f64) -> f64 {
    THETA_CAP * z.tanh()
}

/// Conditional sum of squares with `e_0 = 0`.
fn css(w: &[f64], c: f64, theta: f64) -> f64 {
    let mut prev = 0.0;
    let mut ss = 0.0;
    for &x in w {
        let e = x - c - theta * prev;
        ss += e * e;
        prev = e;
    }
    ss
}

/// Exact Gaussian likelihood pieces via the innovations recursion:
/// returns `(Σ u_n² / r_{n-1}, Σ ln r_{n-1})`.
fn innovations(w: &[f64], c: f64, theta: f64) -> (f64, f64) {
    let t2 = theta * theta;
    let mut r = 1.0 + t2;
    let mut pred = 0.0;
    let mut weighted = 0.0;
    let mut log_r = 0.0;
    for &x in w {
        let u = x - c - pred;
        weighted += u * u / r;
        log_r += r.ln();
        pred = theta / r * u;
        r = 1.0 + t2 - t2 / r;
    }
    (weighted, log_r)
}

fn differences(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < MIN_LEN {
        return Err(Error::InsufficientData(format!("ARIMA needs at least {MIN_LEN} points, got {}", series.len())));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSeries("non-finite value".into()));
    }
    let d: Vec<f64> = series.windows(2).map(|p| p[1] - p[0]).collect();
    if d.iter().all(|&x| x == d[0]) {
        return Err(Error::DegenerateSeries("differenced series is constant".into()));
    }
    Ok(d)
}

pub fn fit_arima011(series: &[f64]) -> Result<ArimaFit> {
    fit_arima011_pooled(&[series])
}

/// Shared `(c, θ, σ)` across realisations; identical realisations are merged.
pub fn fit_arima011_pooled(series: &[&[f64]]) -> Result<ArimaFit> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no volume series to fit".into()));
    }
    let diffs: Vec<Vec<f64>> = series.iter().map(|s| differences(s)).collect::<Result<_>>()?;
    let refs: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
    let groups: Vec<Group> = group_series(&refs);
    let n_obs: f64 = groups.iter().map(|g| g.weight * g.data.len() as f64).sum();
    let mean = groups.iter().map(|g| g.weight * g.data.iter().sum::<f64>()).sum::<f64>() / n_obs;
    let spread = (groups
        .iter()
        .map(|g| g.weight * g.data.iter().map(|x| (x - mean).powi(2)).sum::<f64>())
        .sum::<f64>()
        / n_obs)
        .sqrt();
    // work on standardised differences so both stages see O(1) scales
    let standard: Vec<Group> = groups
        .iter()
        .map(|g| Group { data: g.data.iter().map(|x| (x - mean) / spread).collect(), weight: g.weight })
        .collect();

    let css_obj = |x: &[f64]| {
        let theta = theta_of(x[1]);
        standard.iter().map(|g| g.weight * css(&g.data, x[0], theta)).sum::<f64>() / n_obs
    };
    let start = minimize(css_obj, &[0.0, 0.0], BfgsOptions::default());

    let profile = |x: &[f64]| -> f64 {
        let theta = theta_of(x[1]);
        let (mut weighted, mut log_r) = (0.0, 0.0);
        for g in &standard {
            let (wsum, lsum) = innovations(&g.data, x[0], theta);
            weighted += g.weight * wsum;
            log_r += g.weight * lsum;
        }
        let sigma2 = weighted / n_obs;
        0.5 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0) + 0.5 * log_r / n_obs
    };
    let exact = minimize(profile, &start.x, BfgsOptions::default());
    let theta = theta_of(exact.x[1]);
    let (mut weighted, mut log_r) = (0.0, 0.0);
    for g in &standard {
        let (wsum, lsum) = innovations(&g.data, exact.x[0], theta);
        weighted += g.weight * wsum;
        log_r += g.weight * lsum;
    }
    let sigma2_std = weighted / n_obs;
    if !(sigma2_std > 0.0) {
        return Err(Error::DegenerateSeries("zero innovation variance".into()));
    }
    let m_total = series.len() as f64;
    let loglik_std = -0.5 * n_obs * ((2.0 * std::f64::consts::PI * sigma2_std).ln() + 1.0) - 0.5 * log_r;
    Ok(ArimaFit {
        theta,
        log_sigma: 0.5 * sigma2_std.ln() + spread.ln(),
        intercept: mean + spread * exact.x[0],
        loglik: m_total * (loglik_std - n_obs * spread.ln()),
        converged: exact.converged,
        at_boundary: theta.abs() > 1.0 - 1e-5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub(crate) fn integrated_ma(n: usize, theta: f64, sigma: f64, drift: f64, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed);
        let mut prev: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
        let mut y = 1000.0;
        let mut out = vec![y];
        for _ in 0..n {
            let e = sigma * rng.sample::<f64, _>(StandardNormal);
            y += drift + e + theta * prev;
            prev = e;
            out.push(y);
        }
        out
    }

    #[test]
    fn recovers_theta() {
        let y = integrated_ma(3000, 0.5, 2.0, 0.1, 4);
        let fit = fit_arima011(&y).unwrap();
        assert!((fit.theta - 0.5).abs() < 0.06, "{fit:?}");
        assert!((fit.log_sigma - 2.0_f64.ln()).abs() < 0.05);
        assert!((fit.intercept - 0.1).abs() < 0.15);
        assert!(fit.converged);
    }

    #[test]
    fn random_walk_has_zero_theta() {
        let y = integrated_ma(3000, 0.0, 1.0, 0.0, 9);
        let fit = fit_arima011(&y).unwrap();
        assert!(fit.theta.abs() < 1.96 * (1.0 / 3000.0_f64).sqrt() * 1.5, "{fit:?}");
    }

    #[test]
    fn linear_series_is_degenerate() {
        let y: Vec<f64> = (0..100).map(|i| 3.0 * i as f64).collect();
        assert!(matches!(fit_arima011(&y), Err(Error::DegenerateSeries(_))));
    }

    #[test]
    fn exact_likelihood_matches_dense_gaussian() {
        // brute-force: log N(w; c·1, σ² Γ(θ)) with the tridiagonal MA(1) covariance
        let w = [0.3, -1.1, 0.7, 2.0, -0.4, 0.9];
        let (c, theta, sigma2) = (0.2, -0.6, 1.3);
        let n = w.len();
        let cov = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => sigma2 * (1.0 + theta * theta),
            1 => sigma2 * theta,
            _ => 0.0,
        });
        let chol = nalgebra::Cholesky::new(cov).unwrap();
        let x = nalgebra::DVector::from_iterator(n, w.iter().map(|v| v - c));
        let quad = x.dot(&chol.solve(&x));
        let logdet = 2.0 * chol.l().diagonal().iter().map(|d: &f64| d.ln()).sum::<f64>();
        let oracle = -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + logdet + quad);
        let (weighted, log_r) = innovations(&w, c, theta);
        let ll = -0.5 * (n as f64 * (2.0 * std::f64::consts::PI * sigma2).ln() + log_r + weighted / sigma2);
        assert!((ll - oracle).abs() < 1e-12);
    }

    #[test]
    fn pooled_copies_equal_single() {
        let y = integrated_ma(400, 0.3, 1.0, 0.0, 2);
        let a = fit_arima011(&y).unwrap();
        let b = fit_arima011_pooled(&[&y, &y]).unwrap();
        assert_eq!((a.theta, a.log_sigma), (b.theta, b.log_sigma));
    }
}
