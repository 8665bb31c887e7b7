//! Re-simulation coverage check: does each observed auxiliary coefficient
//! fall inside the central interval of coefficients fitted to simulations
//! from a calibrated parameter set?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::simulated_coefficients;
use crate::auxiliary::AuxCoefficients;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sim::{AgentParams, SimConfig};

/// Smallest replication count accepted by [`coverage_analysis`].
pub const MIN_REPLICATIONS: usize = 20;

fn default_replications() -> usize {
    50
}
fn default_level() -> f64 {
    0.95
}
fn default_delta() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSettings {
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
    pub sim: SimConfig,
    #[serde(default = "default_delta")]
    pub delta_minutes: u32,
}

impl CoverageSettings {
    pub fn new(sim: SimConfig, seed: u64) -> Self {
        Self { replications: default_replications(), level: default_level(), seed, sim, delta_minutes: default_delta() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub solution: usize,
    /// Interval bounds per coefficient; empty when fewer than two
    /// replications succeeded.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub covered: Vec<bool>,
    pub valid_replications: usize,
    pub failed_replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTable {
    pub level: f64,
    pub replications: usize,
    pub names: Vec<String>,
    pub rows: Vec<CoverageRow>,
    /// Share of solutions covering each coefficient.
    pub proportions: Vec<f64>,
    /// Share of all (solution, coefficient) pairs covered.
    pub mean_coverage: f64,
}

/// Sample quantile with linear interpolation between order statistics
/// (`h = (n−1)p`). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn coverage_analysis(
    front: &[AgentParams],
    observed: &AuxCoefficients,
    settings: &CoverageSettings,
) -> Result<CoverageTable> {
    if settings.replications < MIN_REPLICATIONS {
        return Err(Error::InsufficientReplications { got: settings.replications, min: MIN_REPLICATIONS });
    }
    if front.is_empty() {
        return Err(Error::InvalidConfig("coverage needs at least one solution".into()));
    }
    if !(settings.level > 0.0 && settings.level < 1.0) {
        return Err(Error::InvalidConfig(format!("coverage level must lie in (0,1), got {}", settings.level)));
    }
    settings.sim.validate()?;
    let target = observed.to_vec();
    let k = target.len();
    let tail = 0.5 * (1.0 - settings.level);

    let rows = front
        .iter()
        .enumerate()
        .map(|(j, theta)| {
            let solution_seed = derive_seed(settings.seed, j as u64);
            let fits: Vec<Option<Vec<f64>>> = (0..settings.replications)
                .into_par_iter()
                .map(|r| {
                    simulated_coefficients(theta, &settings.sim, 1, derive_seed(solution_seed, r as u64), settings.delta_minutes)
                        .ok()
                        .map(|c| c.to_vec())
                })
                .collect();
            let valid: Vec<Vec<f64>> = fits.into_iter().flatten().collect();
            let failed = settings.replications - valid.len();
            if valid.len() < 2 {
                return CoverageRow {
                    solution: j,
                    lower: Vec::new(),
                    upper: Vec::new(),
                    covered: vec![false; k],
                    valid_replications: valid.len(),
                    failed_replications: failed,
                };
            }
            let (mut lower, mut upper, mut covered) = (Vec::with_capacity(k), Vec::with_capacity(k), Vec::with_capacity(k));
            for c in 0..k {
                let mut col: Vec<f64> = valid.iter().map(|v| v[c]).collect();
                col.sort_by(f64::total_cmp);
                let (lo, hi) = (quantile_sorted(&col, tail), quantile_sorted(&col, 1.0 - tail));
                lower.push(lo);
                upper.push(hi);
                covered.push(lo <= target[c] && target[c] <= hi);
            }
            CoverageRow { solution: j, lower, upper, covered, valid_replications: valid.len(), failed_replications: failed }
        })
        .collect::<Vec<_>>();

    let n = rows.len() as f64;
    let proportions: Vec<f64> =
        (0..k).map(|c| rows.iter().filter(|r| r.covered[c]).count() as f64 / n).collect();
    let mean_coverage = proportions.iter().sum::<f64>() / k as f64;
    Ok(CoverageTable {
        level: settings.level,
        replications: settings.replications,
        names: AuxCoefficients::NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
        proportions,
        mean_coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 5.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert!((quantile_sorted(&xs, 0.025) - 1.1).abs() < 1e-12);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn too_few_replications() {
        let settings = CoverageSettings { replications: 2, ..CoverageSettings::new(SimConfig::new(10, 0), 0) };
        let c = AuxCoefficients { beta1: [0.0; 3], beta2: [0.0; 4] };
        let theta = crate::sim::AgentParams::from_reference(
            &crate::sim::ReferenceParams {
                mu0_lo_passive: 1.0,
                mu0_lo_direct: 1.0,
                mu0_mo: 1.0,
                gamma0: 0.0,
                nu: 5.0,
                sigma_mo: 1.0,
                sigma: (0..2).map(|i| (0..2).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
            },
            1,
            1,
            crate::stochastic::OrderSizeModel::Constant { size: 1 },
        );
        assert!(matches!(
            coverage_analysis(&[theta], &c, &settings),
            Err(Error::InsufficientReplications { got: 2, min: 20 })
        ));
    }
}
