use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{cholesky, OrderSizeModel, SkewTParams};

/// Parameters of the liquidity provider and liquidity demander. Both book
/// sides share one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Limit-order baseline at passive levels (orders per interval).
    pub mu0_lo_passive: f64,
    /// Limit-order baseline at aggressive levels.
    pub mu0_lo_direct: f64,
    pub mu0_mo: f64,
    pub mu0_c_passive: f64,
    pub mu0_c_direct: f64,
    /// Per-level skewness of the limit-order and cancellation draws.
    pub skew_lo: Vec<f64>,
    pub skew_mo: f64,
    pub nu: f64,
    /// Scale (standard deviation) of the market-order draw.
    pub sigma_mo: f64,
    /// Row-major covariance of the limit-order and cancellation draws.
    pub sigma: Vec<Vec<f64>>,
    pub m_lo: Vec<f64>,
    #[serde(default)]
    pub m_mo: f64,
    pub order_size_model: OrderSizeModel,
    pub l_p: usize,
    pub l_d: usize,
}

/// The constrained parameterisation: one skewness shared by every draw,
/// zero locations and cancellation baselines equal to submission baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceParams {
    pub mu0_lo_passive: f64,
    pub mu0_lo_direct: f64,
    pub mu0_mo: f64,
    pub gamma0: f64,
    pub nu: f64,
    pub sigma_mo: f64,
    pub sigma: Vec<Vec<f64>>,
}

impl AgentParams {
    pub fn from_reference(r: &ReferenceParams, l_p: usize, l_d: usize, order_size_model: OrderSizeModel) -> Self {
        let l_t = l_p + l_d;
        Self {
            mu0_lo_passive: r.mu0_lo_passive,
            mu0_lo_direct: r.mu0_lo_direct,
            mu0_mo: r.mu0_mo,
            mu0_c_passive: r.mu0_lo_passive,
            mu0_c_direct: r.mu0_lo_direct,
            skew_lo: vec![r.gamma0; l_t],
            skew_mo: r.gamma0,
            nu: r.nu,
            sigma_mo: r.sigma_mo,
            sigma: r.sigma.clone(),
            m_lo: vec![0.0; l_t],
            m_mo: 0.0,
            order_size_model,
            l_p,
            l_d,
        }
    }

    pub fn levels(&self) -> usize {
        self.l_p + self.l_d
    }

    pub fn sigma_trace(&self) -> f64 {
        (0..self.sigma.len()).map(|i| self.sigma[i].get(i).copied().unwrap_or(0.0)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.l_p == 0 || self.l_d == 0 {
            return bad("l_p and l_d must be positive".into());
        }
        let l_t = self.levels();
        for (name, v) in [
            ("mu0_lo_passive", self.mu0_lo_passive),
            ("mu0_lo_direct", self.mu0_lo_direct),
            ("mu0_mo", self.mu0_mo),
            ("mu0_c_passive", self.mu0_c_passive),
            ("mu0_c_direct", self.mu0_c_direct),
            ("nu", self.nu),
            ("sigma_mo", self.sigma_mo),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.skew_lo.len() != l_t || self.m_lo.len() != l_t || self.sigma.len() != l_t {
            return bad(format!("skew_lo, m_lo and sigma must all have {l_t} levels"));
        }
        if self.sigma.iter().any(|row| row.len() != l_t) {
            return bad(format!("sigma must be {l_t}x{l_t}"));
        }
        if self.skew_lo.iter().chain(&self.m_lo).chain([&self.skew_mo, &self.m_mo]).any(|x| !x.is_finite()) {
            return bad("skewness and location entries must be finite".into());
        }
        self.order_size_model.validate()?;
        cholesky(&self.lo_skew_t().sigma_matrix())?;
        Ok(())
    }

    pub fn lo_skew_t(&self) -> SkewTParams {
        SkewTParams { m: self.m_lo.clone(), beta: self.skew_lo.clone(), nu: self.nu, sigma: self.sigma.clone() }
    }

    pub fn mo_skew_t(&self) -> SkewTParams {
        SkewTParams {
            m: vec![self.m_mo],
            beta: vec![self.skew_mo],
            nu: self.nu,
            sigma: vec![vec![self.sigma_mo * self.sigma_mo]],
        }
    }

    /// Limit-order baselines per window level index.
    pub fn lo_baselines(&self) -> Vec<f64> {
        (0..self.levels())
            .map(|i| if i + 1 > self.l_d { self.mu0_lo_passive } else { self.mu0_lo_direct })
            .collect()
    }

    pub fn cancel_baselines(&self) -> Vec<f64> {
        (0..self.levels())
            .map(|i| if i + 1 > self.l_d { self.mu0_c_passive } else { self.mu0_c_direct })
            .collect()
    }
}

/// Caps cancellations relative to submissions: cancellation baselines become
/// `(1 − 1/q)` times the limit-order baselines.
pub fn apply_quote_to_trade(theta: &AgentParams, q: f64) -> Result<AgentParams> {
    if !(q > 1.0) {
        return Err(Error::InvalidRatio(q));
    }
    let factor = 1.0 - 1.0 / q;
    Ok(AgentParams {
        mu0_c_passive: factor * theta.mu0_lo_passive,
        mu0_c_direct: factor * theta.mu0_lo_direct,
        ..theta.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> AgentParams {
        let sigma = (0..8).map(|i| (0..8).map(|j| if i == j { 0.5 } else { 0.0 }).collect()).collect();
        let r = ReferenceParams {
            mu0_lo_passive: 20.0,
            mu0_lo_direct: 5.0,
            mu0_mo: 3.0,
            gamma0: -0.2,
            nu: 10.0,
            sigma_mo: 1.5,
            sigma,
        };
        AgentParams::from_reference(&r, 5, 3, OrderSizeModel::Constant { size: 1 })
    }

    #[test]
    fn reference_constraints() {
        let p = params();
        p.validate().unwrap();
        assert_eq!(p.mu0_c_passive, p.mu0_lo_passive);
        assert!(p.skew_lo.iter().all(|&g| g == -0.2));
        assert_eq!(p.lo_baselines(), vec![5.0, 5.0, 5.0, 20.0, 20.0, 20.0, 20.0, 20.0]);
        assert!((p.sigma_trace() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn quote_to_trade_factors() {
        let p = params();
        let q100 = apply_quote_to_trade(&p, 100.0).unwrap();
        assert!((q100.mu0_c_passive - 0.99 * 20.0).abs() < 1e-12);
        let q20 = apply_quote_to_trade(&p, 20.0).unwrap();
        assert!((q20.mu0_c_direct - 0.95 * 5.0).abs() < 1e-12);
        let qinf = apply_quote_to_trade(&p, f64::INFINITY).unwrap();
        assert_eq!(qinf.mu0_c_passive, p.mu0_lo_passive);
        assert!(matches!(apply_quote_to_trade(&p, 1.0), Err(Error::InvalidRatio(_))));
        assert!(matches!(apply_quote_to_trade(&p, 0.5), Err(Error::InvalidRatio(_))));
    }

    #[test]
    fn validation_catches_bad_sigma() {
        let mut p = params();
        p.sigma[0][0] = -1.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.mu0_mo = 0.0;
        assert!(p.validate().is_err());
    }
}
