//! Single-objective indirect inference: one distance between concatenated
//! auxiliary vectors, improved by keep-best random search.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::kernel::{CovarianceKernel, GenerationHistory, KernelSettings};
use super::nsga2::{matrix_rows, PENALTY};
use super::operators::Bounds;
use super::problem::{simulated_coefficients, LobProblem};
use crate::error::{Error, Result};
use crate::rng::{child, derive_seed};

/// A model whose auxiliary statistics can be computed for a candidate.
pub trait AuxiliaryModel: Sync {
    fn bounds(&self) -> &Bounds;
    fn covariance_dim(&self) -> Option<usize> {
        None
    }
    /// `None` marks a failed evaluation.
    fn auxiliary(&self, genes: &[f64], sigma: Option<&DMatrix<f64>>, seed: u64) -> Option<Vec<f64>>;
}

impl AuxiliaryModel for LobProblem {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn covariance_dim(&self) -> Option<usize> {
        Some(self.layout.levels())
    }

    fn auxiliary(&self, genes: &[f64], sigma: Option<&DMatrix<f64>>, seed: u64) -> Option<Vec<f64>> {
        let theta = self.decode(genes, sigma).ok()?;
        let s = &self.setup;
        simulated_coefficients(&theta, &s.sim, s.realisations, seed, s.delta_minutes).ok().map(|c| c.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    /// Weighting matrix `W` in `sqrt(dᵀ W d)`; must be SPD.
    Mahalanobis { weight: Vec<Vec<f64>> },
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch(a.len(), b.len()));
        }
        let d = DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x - y));
        match self {
            Self::Euclidean => Ok(d.norm()),
            Self::Mahalanobis { weight } => {
                let n = d.len();
                if weight.len() != n || weight.iter().any(|r| r.len() != n) {
                    return Err(Error::LengthMismatch(weight.len(), n));
                }
                let w = DMatrix::from_fn(n, n, |i, j| weight[i][j]);
                crate::stochastic::cholesky(&w)?;
                Ok((d.transpose() * w * &d)[(0, 0)].max(0.0).sqrt())
            }
        }
    }
}

fn default_iterations() -> usize {
    500
}
fn default_restart() -> f64 {
    0.2
}
fn default_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleConfig {
    /// Total candidates evaluated, including the initial one.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Probability that a proposal is a fresh uniform draw in the bounds.
    #[serde(default = "default_restart")]
    pub restart_probability: f64,
    /// Initial local step as a fraction of each bound's width.
    #[serde(default = "default_step")]
    pub initial_step: f64,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default)]
    pub kernel: KernelSettings,
}

fn default_metric() -> Metric {
    Metric::Euclidean
}

impl Default for SingleConfig {
    fn default() -> Self {
        Self {
            iterations: default_iterations(),
            seed: 0,
            restart_probability: default_restart(),
            initial_step: default_step(),
            metric: Metric::Euclidean,
            kernel: KernelSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleResult {
    pub genes: Vec<f64>,
    pub sigma: Option<Vec<Vec<f64>>>,
    pub distance: f64,
    /// Best distance after each iteration; non-increasing.
    pub trace: Vec<f64>,
    pub accepted: usize,
    pub eval_seed: u64,
}

/// Keep-best search with a mixture of uniform restarts and Gaussian local
/// moves whose step follows the one-fifth success rule. Every candidate is
/// evaluated with the same seed so distances are comparable.
pub fn indirect_inference_single<P: AuxiliaryModel>(
    model: &P,
    target: &[f64],
    config: &SingleConfig,
) -> Result<SingleResult> {
    if config.iterations == 0 {
        return Err(Error::InvalidConfig("at least one iteration is required".into()));
    }
    if !(0.0..=1.0).contains(&config.restart_probability) || !(config.initial_step > 0.0) {
        return Err(Error::InvalidConfig("restart probability must be in [0,1] and step positive".into()));
    }
    if let Metric::Mahalanobis { .. } = config.metric {
        config.metric.distance(target, target)?;
    }
    let bounds = model.bounds();
    let kernel = model.covariance_dim().map(|d| CovarianceKernel::new(d, config.kernel.clone())).transpose()?;
    let mut rng = child(config.seed, 0);
    let eval_seed = derive_seed(config.seed, 1);

    let score = |genes: &[f64], sigma: Option<&DMatrix<f64>>| -> f64 {
        model
            .auxiliary(genes, sigma, eval_seed)
            .and_then(|aux| config.metric.distance(&aux, target).ok())
            .filter(|d| d.is_finite())
            .unwrap_or(PENALTY)
    };

    let mut best_genes = bounds.sample_uniform(&mut rng);
    let mut best_sigma = match &kernel {
        Some(k) => Some(k.sample(k.psi_prior(), &mut rng)?),
        None => None,
    };
    let mut best = score(&best_genes, best_sigma.as_ref());
    let mut trace = vec![best];
    let mut accepted = 0;
    let mut step = config.initial_step;

    for _ in 1..config.iterations {
        let restart = rng.random::<f64>() < config.restart_probability;
        let genes: Vec<f64> = if restart {
            bounds.sample_uniform(&mut rng)
        } else {
            let mut g: Vec<f64> = best_genes
                .iter()
                .zip(&bounds.params)
                .map(|(x, b)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x + step * (b.upper - b.lower) * z
                })
                .collect();
            bounds.clamp(&mut g);
            g
        };
        let sigma = match (&kernel, &best_sigma) {
            (Some(k), Some(s)) if !restart => {
                let history = [GenerationHistory { sigmas: vec![s.clone()], ranks: vec![1] }];
                Some(k.sample(&k.psi_n(&history), &mut rng)?)
            }
            (Some(k), _) => Some(k.sample(k.psi_prior(), &mut rng)?),
            (None, _) => None,
        };
        let d = score(&genes, sigma.as_ref());
        let improved = d < best;
        if improved {
            best = d;
            best_genes = genes;
            best_sigma = sigma;
            accepted += 1;
        }
        if !restart {
            step *= if improved { (0.8f64 / 3.0).exp() } else { (-0.2f64 / 3.0).exp() };
            step = step.clamp(1e-9, 0.5);
        }
        trace.push(best);
    }

    Ok(SingleResult {
        genes: best_genes,
        sigma: best_sigma.as_ref().map(matrix_rows),
        distance: best,
        trace,
        accepted,
        eval_seed,
    })
}
