//! Gaussian quasi-maximum-likelihood GARCH(1,1) without a mean term.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::optim::{hessian, minimize, BfgsOptions};
use super::pooling::{group_series, Group};
use crate::error::{Error, Result};

const MIN_LEN: usize = 50;
const PERSISTENCE_CAP: f64 = 1.0 - 2e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    /// Log-likelihood summed over every pooled realisation.
    pub loglik: f64,
    pub converged: bool,
    /// Set when a coefficient sits at a constraint (zero ARCH/GARCH term
    /// or persistence at its cap).
    pub at_boundary: bool,
    pub iterations: usize,
    /// Asymptotic standard errors of `(a0, a1, b1)` from the observed
    /// information, when it is invertible.
    pub std_errors: Option<[f64; 3]>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained coordinates to `(a0, a1, b1)`.
fn natural(x: &[f64]) -> [f64; 3] {
    let persistence = PERSISTENCE_CAP * logistic(x[1]);
    let share = logistic(x[2]);
    [x[0].exp(), persistence * share, persistence * (1.0 - share)]
}

fn unconstrained(a1: f64, b1: f64, var: f64) -> [f64; 3] {
    let p = a1 + b1;
    [(var * (1.0 - p)).ln(), logit(p / PERSISTENCE_CAP), logit(a1 / p)]
}

/// Gaussian log-likelihood of one series; the conditional variance starts at
/// the series' own mean square.
pub fn garch_loglik(returns: &[f64], a0: f64, a1: f64, b1: f64) -> f64 {
    let init = returns.iter().map(|r| r * r).sum::<f64>() / returns.len() as f64;
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut h = init;
    let mut ll = 0.0;
    for (t, &r) in returns.iter().enumerate() {
        if t > 0 {
            let prev = returns[t - 1];
            h = a0 + a1 * prev * prev + b1 * h;
        }
        if !(h > 0.0) || !h.is_finite() {
            return f64::NEG_INFINITY;
        }
        ll -= 0.5 * (ln_2pi + h.ln() + r * r / h);
    }
    ll
}

fn check(series: &[f64]) -> Result<()> {
    if series.len() < MIN_LEN {
        return Err(Error::InsufficientData(format!("GARCH needs at least {MIN_LEN} returns, got {}", series.len())));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSeries("non-finite return".into()));
    }
    if series.iter().all(|&x| x == series[0]) {
        return Err(Error::DegenerateSeries("constant return series".into()));
    }
    Ok(())
}

pub fn fit_garch11(returns: &[f64]) -> Result<GarchFit> {
    fit_garch11_pooled(&[returns])
}

/// Fits one parameter vector to several realisations by maximising the
/// summed log-likelihood. Bit-identical realisations are merged first, so
/// `M` copies of one series give exactly the single-series estimates.
pub fn fit_garch11_pooled(series: &[&[f64]]) -> Result<GarchFit> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no return series to fit".into()));
    }
    for s in series {
        check(s)?;
    }
    let groups = group_series(series);
    let total_weight: f64 = groups.iter().map(|g| g.weight * g.data.len() as f64).sum();
    let var = groups.iter().map(|g| g.weight * g.data.iter().map(|r| r * r).sum::<f64>()).sum::<f64>() / total_weight;
    let scale = var.sqrt();
    let standard: Vec<Group> = groups
        .iter()
        .map(|g| Group { data: g.data.iter().map(|r| r / scale).collect(), weight: g.weight })
        .collect();
    let pooled = |a0: f64, a1: f64, b1: f64| -> f64 {
        standard.iter().map(|g| g.weight * garch_loglik(&g.data, a0, a1, b1)).sum()
    };
    let objective = |x: &[f64]| {
        let [a0, a1, b1] = natural(x);
        -pooled(a0, a1, b1) / total_weight
    };

    // fixed low-persistence start: with serially independent data b1 is
    // unidentified, and this start keeps the optimiser off the flat ridge
    // a0 / (1 - b1) = const
    let best = minimize(objective, &unconstrained(0.05, 0.05, 1.0), BfgsOptions::default());
    let [a0s, a1, b1] = natural(&best.x);
    let m_total = series.len() as f64;
    let n_std = pooled(a0s, a1, b1);
    let n_obs: f64 = standard.iter().map(|g| g.weight * g.data.len() as f64).sum();
    let loglik = m_total * (n_std - n_obs * scale.ln());

    let at_boundary = a1 + b1 > 1.0 - 1e-5 || a1 < 1e-8 || b1 < 1e-8;
    let info = |p: &[f64]| m_total * pooled(p[0], p[1], p[2]);
    let steps = [1e-4 * a0s.max(1e-8), 1e-4, 1e-4];
    let h = hessian(&info, &[a0s, a1, b1], &steps);
    let std_errors = covariance(&(-h)).and_then(|c| {
        let se = [c[(0, 0)].sqrt() * var, c[(1, 1)].sqrt(), c[(2, 2)].sqrt()];
        se.iter().all(|s| s.is_finite()).then_some(se)
    });
    Ok(GarchFit {
        a0: a0s * var,
        a1,
        b1,
        loglik,
        converged: best.converged,
        at_boundary,
        iterations: best.iterations,
        std_errors,
    })
}

fn covariance(info: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if info.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let inv = info.clone().try_inverse()?;
    (0..inv.nrows()).all(|i| inv[(i, i)] > 0.0).then_some(inv)
}
