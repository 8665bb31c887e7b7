use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Sample autocorrelations for lags `0..=max_lag` and partial
/// autocorrelations for lags `1..=max_lag` (Durbin–Levinson).
pub fn acf_pacf(series: &[f64], max_lag: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = series.len();
    if n <= max_lag + 1 {
        return Err(Error::InsufficientData(format!("need more than {} points, got {n}", max_lag + 1)));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    if !(c0 > 0.0) {
        return Err(Error::DegenerateSeries("zero variance".into()));
    }
    let acf: Vec<f64> =
        (0..=max_lag).map(|k| dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / c0).collect();

    let mut pacf = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = acf[k] - (1..k).map(|j| phi[j - 1] * acf[k - j]).sum::<f64>();
        let kk = if v > 0.0 { num / v } else { 0.0 };
        let next: Vec<f64> = (1..k).map(|j| phi[j - 1] - kk * phi[k - j - 1]).chain(std::iter::once(kk)).collect();
        phi = next;
        v *= 1.0 - kk * kk;
        pacf.push(kk);
    }
    Ok((acf, pacf))
}

/// Engle's LM test for ARCH effects: regress `r_t²` on an intercept and
/// `lags` of its own lags; statistic `n·R²` against `χ²(lags)`.
pub fn arch_lm_test(returns: &[f64], lags: usize) -> Result<(f64, f64)> {
    if lags == 0 {
        return Err(Error::InvalidConfig("ARCH-LM needs at least one lag".into()));
    }
    if returns.len() <= lags + 10 {
        return Err(Error::InsufficientData(format!("need more than {} returns", lags + 10)));
    }
    let sq: Vec<f64> = returns.iter().map(|r| r * r).collect();
    let n = sq.len() - lags;
    let y = DVector::from_iterator(n, sq[lags..].iter().copied());
    let x = DMatrix::from_fn(n, lags + 1, |i, j| if j == 0 { 1.0 } else { sq[lags + i - j] });
    let ybar = y.mean();
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    if !(sst > 0.0) {
        return Err(Error::DegenerateSeries("squared returns have zero variance".into()));
    }
    let svd = x.clone().svd(true, true);
    let coef = svd.solve(&y, 1e-12).map_err(|e| Error::DegenerateSeries(e.to_string()))?;
    let resid = &y - &x * coef;
    let r2 = (1.0 - resid.norm_squared() / sst).max(0.0);
    let stat = n as f64 * r2;
    let chi = ChiSquared::new(lags as f64).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok((stat, 1.0 - chi.cdf(stat)))
}
