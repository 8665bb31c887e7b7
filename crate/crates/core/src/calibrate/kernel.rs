//! Adaptive Inverse-Wishart proposal for the covariance block of a candidate.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{sample_inverse_wishart, symmetrise};

/// Direction of the exponential generation weights in the history average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryWeighting {
    /// Generation `t` of `n` weighted `w^{n−t}`: recent generations dominate.
    Recency,
    /// Generation `t` weighted `w^t`: early generations dominate.
    Literal,
}

/// How the local component's scale relates to the history average `Ψ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalScale {
    /// Scale `(p1 − d − 1)·Ψ_n`, so local draws have mean `Ψ_n`.
    MomentMatched,
    /// Scale `Ψ_n`, so local draws have mean `Ψ_n / (p1 − d − 1)`.
    Direct,
}

fn default_w1() -> f64 {
    0.1
}
fn default_psi_scale() -> f64 {
    0.5
}
fn default_recency() -> f64 {
    0.9
}
fn default_weighting() -> HistoryWeighting {
    HistoryWeighting::Recency
}
fn default_local_scale() -> LocalScale {
    LocalScale::MomentMatched
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSettings {
    /// Probability of drawing from the diffuse component.
    #[serde(default = "default_w1")]
    pub w1: f64,
    /// Local degrees of freedom; `d + 10` when absent.
    #[serde(default)]
    pub p1: Option<f64>,
    /// Diffuse degrees of freedom; `d + 2` when absent.
    #[serde(default)]
    pub p2: Option<f64>,
    /// The prior and diffuse scale is `psi_scale · I`.
    #[serde(default = "default_psi_scale")]
    pub psi_scale: f64,
    /// Exponential generation weight `w < 1`.
    #[serde(default = "default_recency")]
    pub w: f64,
    #[serde(default = "default_weighting")]
    pub weighting: HistoryWeighting,
    #[serde(default = "default_local_scale")]
    pub local_scale: LocalScale,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            w1: default_w1(),
            p1: None,
            p2: None,
            psi_scale: default_psi_scale(),
            w: default_recency(),
            weighting: default_weighting(),
            local_scale: default_local_scale(),
        }
    }
}

/// Covariances of the individuals kept in one generation and their ranks.
#[derive(Debug, Clone, Default)]
pub struct GenerationHistory {
    pub sigmas: Vec<DMatrix<f64>>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CovarianceKernel {
    d: usize,
    settings: KernelSettings,
    psi_prior: DMatrix<f64>,
    p1: f64,
    p2: f64,
}

impl CovarianceKernel {
    pub fn new(d: usize, settings: KernelSettings) -> Result<Self> {
        let p1 = settings.p1.unwrap_or(d as f64 + 10.0);
        let p2 = settings.p2.unwrap_or(d as f64 + 2.0);
        let lim = d as f64 - 1.0;
        if d == 0 || !(p1 > lim) || !(p2 > lim) {
            return Err(Error::InvalidConfig(format!("kernel dof must exceed {lim}: p1={p1}, p2={p2}")));
        }
        if settings.local_scale == LocalScale::MomentMatched && !(p1 > d as f64 + 1.0) {
            return Err(Error::InvalidConfig(format!("moment matching needs p1 > d + 1, got {p1}")));
        }
        if !(0.0..=1.0).contains(&settings.w1) || !(settings.w > 0.0 && settings.w <= 1.0) {
            return Err(Error::InvalidConfig("kernel weights w1 in [0,1] and w in (0,1] required".into()));
        }
        if !(settings.psi_scale > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let psi_prior = DMatrix::identity(d, d) * settings.psi_scale;
        Ok(Self { d, settings, psi_prior, p1, p2 })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn psi_prior(&self) -> &DMatrix<f64> {
        &self.psi_prior
    }

    /// Generation- and inverse-rank-weighted average of past covariances;
    /// the prior scale when there is no history.
    pub fn psi_n(&self, history: &[GenerationHistory]) -> DMatrix<f64> {
        let n = history.len();
        let mut total = DMatrix::zeros(self.d, self.d);
        let mut weight_sum = 0.0;
        for (idx, generation) in history.iter().enumerate() {
            if generation.sigmas.is_empty() {
                continue;
            }
            let t = idx + 1;
            let w_t = match self.settings.weighting {
                HistoryWeighting::Recency => self.settings.w.powi((n - t) as i32),
                HistoryWeighting::Literal => self.settings.w.powi(t as i32),
            };
            let inv_rank_sum: f64 = generation.ranks.iter().map(|&r| 1.0 / r as f64).sum();
            let mut avg = DMatrix::zeros(self.d, self.d);
            for (s, &r) in generation.sigmas.iter().zip(&generation.ranks) {
                avg += s * (1.0 / r as f64);
            }
            total += avg * (w_t / inv_rank_sum);
            weight_sum += w_t;
        }
        if weight_sum == 0.0 {
            return self.psi_prior.clone();
        }
        symmetrise(&(total / weight_sum))
    }

    /// One draw from `(1 − w1)·IW(local, p1) + w1·IW(Ψ, p2)`.
    pub fn sample<R: Rng + ?Sized>(&self, psi_n: &DMatrix<f64>, rng: &mut R) -> Result<DMatrix<f64>> {
        if rng.random::<f64>() < self.settings.w1 {
            return sample_inverse_wishart(&self.psi_prior, self.p2, rng);
        }
        let local = match self.settings.local_scale {
            LocalScale::MomentMatched => psi_n * (self.p1 - self.d as f64 - 1.0),
            LocalScale::Direct => psi_n.clone(),
        };
        sample_inverse_wishart(&local, self.p1, rng)
    }
}

/// Single proposal from the kernel given the raw history.
pub fn mutate_covariance<R: Rng + ?Sized>(
    history: &[GenerationHistory],
    kernel: &CovarianceKernel,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    kernel.sample(&kernel.psi_n(history), rng)
}
