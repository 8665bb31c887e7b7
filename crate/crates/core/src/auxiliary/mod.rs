//! Auxiliary data transform, auxiliary-model estimators and diagnostics.

mod arima;
mod diagnostics;
mod garch;
pub mod optim;
mod pooling;
mod series;

use serde::{Deserialize, Serialize};

pub use arima::{fit_arima011, fit_arima011_pooled, ArimaFit};
pub use diagnostics::{acf_pacf, arch_lm_test};
pub use garch::{fit_garch11, fit_garch11_pooled, garch_loglik, GarchFit};
pub use series::{transform, AuxSeries};

use crate::error::{Error, Result};

/// `beta1 = (a0, a1, b1)`, `beta2 = (θ_bid, ln σ_bid, θ_ask, ln σ_ask)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxCoefficients {
    pub beta1: [f64; 3],
    pub beta2: [f64; 4],
}

impl AuxCoefficients {
    pub fn to_vec(&self) -> Vec<f64> {
        self.beta1.iter().chain(&self.beta2).copied().collect()
    }

    pub const NAMES: [&'static str; 7] = ["a0", "a1", "b1", "theta_bid", "log_sigma_bid", "theta_ask", "log_sigma_ask"];
}

/// Pooled fits of both auxiliary models with their diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxFit {
    pub coefficients: AuxCoefficients,
    pub garch: GarchFit,
    pub arima_bid: ArimaFit,
    pub arima_ask: ArimaFit,
}

/// Fits each auxiliary model once, sharing its coefficients across all
/// realisations.
pub fn fit_auxiliary(series: &[AuxSeries]) -> Result<AuxFit> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no realisations to fit".into()));
    }
    let returns: Vec<&[f64]> = series.iter().map(|s| s.returns.as_slice()).collect();
    let bid: Vec<&[f64]> = series.iter().map(|s| s.vol_bid.as_slice()).collect();
    let ask: Vec<&[f64]> = series.iter().map(|s| s.vol_ask.as_slice()).collect();
    let garch = fit_garch11_pooled(&returns)?;
    let arima_bid = fit_arima011_pooled(&bid)?;
    let arima_ask = fit_arima011_pooled(&ask)?;
    Ok(AuxFit {
        coefficients: AuxCoefficients {
            beta1: [garch.a0, garch.a1, garch.b1],
            beta2: [arima_bid.theta, arima_bid.log_sigma, arima_ask.theta, arima_ask.log_sigma],
        },
        garch,
        arima_bid,
        arima_ask,
    })
}
