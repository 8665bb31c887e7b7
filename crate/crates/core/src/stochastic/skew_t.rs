//! Multivariate skew-t in its normal variance-mean mixture form
//! `Γ = m + βW + √W Z`, `W ~ InvGamma(ν/2, ν/2)`, `Z ~ N(0, Σ)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::special::ln_bessel_k;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewTParams {
    pub m: Vec<f64>,
    pub beta: Vec<f64>,
    pub nu: f64,
    /// Row-major `d × d` scale matrix.
    pub sigma: Vec<Vec<f64>>,
}

impl SkewTParams {
    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        let d = self.sigma.len();
        DMatrix::from_fn(d, d, |i, j| self.sigma[i].get(j).copied().unwrap_or(f64::NAN))
    }
}

/// Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(m: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if !m.is_square() || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let scale = m.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(1.0);
    if (m - m.transpose()).iter().any(|x| x.abs() > 1e-9 * scale) {
        return Err(Error::NotPositiveDefinite);
    }
    nalgebra::Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)
}

/// Validated skew-t with cached factorisations.
#[derive(Debug, Clone)]
pub struct SkewT {
    m: DVector<f64>,
    beta: DVector<f64>,
    nu: f64,
    chol_l: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    sigma_inv_beta: DVector<f64>,
    beta_quad: f64,
    log_det: f64,
    mixing: Gamma<f64>,
}

impl SkewT {
    pub fn new(params: &SkewTParams) -> Result<Self> {
        let d = params.dim();
        if d == 0 || params.beta.len() != d || params.sigma.len() != d {
            return Err(Error::InvalidConfig(format!(
                "skew-t dimension mismatch: m={}, beta={}, sigma={}",
                d,
                params.beta.len(),
                params.sigma.len()
            )));
        }
        if !(params.nu > 0.0 && params.nu.is_finite()) {
            return Err(Error::InvalidConfig(format!("skew-t dof must be positive, got {}", params.nu)));
        }
        let sigma = params.sigma_matrix();
        let chol = cholesky(&sigma)?;
        let chol_l = chol.l();
        let log_det = 2.0 * chol_l.diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let sigma_inv = chol.inverse();
        let beta = DVector::from_column_slice(&params.beta);
        let sigma_inv_beta = &sigma_inv * &beta;
        let beta_quad = beta.dot(&sigma_inv_beta);
        let mixing = Gamma::new(params.nu / 2.0, 2.0 / params.nu)
            .map_err(|e| Error::InvalidConfig(format!("skew-t mixing law: {e}")))?;
        Ok(Self {
            m: DVector::from_column_slice(&params.m),
            beta,
            nu: params.nu,
            chol_l,
            sigma_inv,
            sigma_inv_beta,
            beta_quad,
            log_det,
            mixing,
        })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Deterministic assembly `m + βw + √w z` from a mixing weight and a
    /// correlated normal vector `z ~ N(0, Σ)`.
    pub fn combine(&self, w: f64, z: &[f64]) -> Vec<f64> {
        let sw = w.sqrt();
        (0..self.dim()).map(|i| self.m[i] + self.beta[i] * w + sw * z[i]).collect()
    }

    /// Draws the mixing weight `W`.
    pub fn sample_mixing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        1.0 / self.mixing.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let w = self.sample_mixing(rng);
        let eps = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let z = &self.chol_l * eps;
        self.combine(w, z.as_slice())
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let diff = DVector::from_column_slice(x) - &self.m;
        let q = diff.dot(&(&self.sigma_inv * &diff));
        let nu = self.nu;
        let half = (nu + d) / 2.0;
        let common = -ln_gamma(nu / 2.0) - 0.5 * d * (std::f64::consts::PI * nu).ln() - 0.5 * self.log_det;
        if self.beta_quad == 0.0 {
            return ln_gamma(half) + common - half * (q / nu).ln_1p();
        }
        let z = ((nu + q) * self.beta_quad).sqrt();
        (1.0 - half) * std::f64::consts::LN_2 + common
            + ln_bessel_k(half, z)
            + diff.dot(&self.sigma_inv_beta)
            + half * z.ln()
            - half * (q / nu).ln_1p()
    }
}

pub fn sample_skew_t<R: Rng + ?Sized>(params: &SkewTParams, rng: &mut R) -> Result<Vec<f64>> {
    Ok(SkewT::new(params)?.sample(rng))
}

pub fn skew_t_log_density(x: &[f64], params: &SkewTParams) -> Result<f64> {
    Ok(SkewT::new(params)?.ln_pdf(x))
}
