//! The agent model as a calibration problem: gene layout, bounds files and
//! the bi-objective auxiliary-coefficient distance.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSettings;
use super::nsga2::{matrix_rows, Evaluation, Problem};
use super::operators::{Bounds, ParamBound};
use crate::auxiliary::{fit_auxiliary, transform, AuxCoefficients, AuxSeries};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sim::{simulate, AgentParams, ModelVariant, SimConfig, SizeVariant, SkewVariant};
use crate::stochastic::OrderSizeModel;

/// Shapes of the two gamma components; only their scales and the mixing
/// weight are calibrated.
pub const MIXTURE_SHAPES: [f64; 2] = [1.0, 2.0];

/// Maps a flat gene vector to agent parameters for one model variant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneLayout {
    pub variant: ModelVariant,
    pub l_p: usize,
    pub l_d: usize,
    /// Order size used by the constant-size variant.
    pub constant_size: u64,
    names: Vec<String>,
}

impl GeneLayout {
    pub fn new(variant: ModelVariant, l_p: usize, l_d: usize, constant_size: u64) -> Result<Self> {
        if l_p == 0 || l_d == 0 {
            return Err(Error::InvalidConfig("l_p and l_d must be positive".into()));
        }
        if constant_size == 0 {
            return Err(Error::InvalidConfig("constant order size must be positive".into()));
        }
        let mut names: Vec<String> = ["mu0_lo_passive", "mu0_lo_direct", "mu0_mo"].map(String::from).to_vec();
        match variant.skew {
            SkewVariant::Scalar => names.push("gamma0".into()),
            SkewVariant::PerLevel => names.push("gamma_mo".into()),
        }
        names.extend(["nu", "sigma_mo"].map(String::from));
        if variant.skew == SkewVariant::PerLevel {
            let lo = -(l_d as i64) + 1;
            names.extend((lo..=l_p as i64).map(|s| format!("gamma_lo_L{s}")));
        }
        if variant.sizes == SizeVariant::GammaMixture {
            names.extend(["mix_weight", "mix_scale1", "mix_scale2"].map(String::from));
        }
        Ok(Self { variant, l_p, l_d, constant_size, names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.l_p + self.l_d
    }

    pub fn decode(&self, genes: &[f64], sigma: &DMatrix<f64>) -> Result<AgentParams> {
        if genes.len() != self.len() {
            return Err(Error::LengthMismatch(genes.len(), self.len()));
        }
        let l_t = self.levels();
        if sigma.nrows() != l_t || sigma.ncols() != l_t {
            return Err(Error::LengthMismatch(sigma.nrows(), l_t));
        }
        let (skew_lo, skew_mo, rest) = match self.variant.skew {
            SkewVariant::Scalar => (vec![genes[3]; l_t], genes[3], &genes[6..]),
            SkewVariant::PerLevel => (genes[6..6 + l_t].to_vec(), genes[3], &genes[6 + l_t..]),
        };
        let order_size_model = match self.variant.sizes {
            SizeVariant::Constant => OrderSizeModel::Constant { size: self.constant_size },
            SizeVariant::GammaMixture => OrderSizeModel::GammaMixture {
                weight: rest[0],
                shape1: MIXTURE_SHAPES[0],
                scale1: rest[1],
                shape2: MIXTURE_SHAPES[1],
                scale2: rest[2],
            },
        };
        let params = AgentParams {
            mu0_lo_passive: genes[0],
            mu0_lo_direct: genes[1],
            mu0_mo: genes[2],
            mu0_c_passive: genes[0],
            mu0_c_direct: genes[1],
            skew_lo,
            skew_mo,
            nu: genes[4],
            sigma_mo: genes[5],
            sigma: matrix_rows(sigma),
            m_lo: vec![0.0; l_t],
            m_mo: 0.0,
            order_size_model,
            l_p: self.l_p,
            l_d: self.l_d,
        };
        params.validate()?;
        Ok(params)
    }

    /// Inverse of [`decode`](Self::decode) for parameters that respect the
    /// layout's constraints.
    pub fn encode(&self, params: &AgentParams) -> Result<Vec<f64>> {
        if params.l_p != self.l_p || params.l_d != self.l_d {
            return Err(Error::InvalidConfig("parameter levels do not match the gene layout".into()));
        }
        self.variant.check(params)?;
        let mut genes = vec![params.mu0_lo_passive, params.mu0_lo_direct, params.mu0_mo];
        match self.variant.skew {
            SkewVariant::Scalar => genes.push(params.skew_lo[0]),
            SkewVariant::PerLevel => genes.push(params.skew_mo),
        }
        genes.extend([params.nu, params.sigma_mo]);
        if self.variant.skew == SkewVariant::PerLevel {
            genes.extend(&params.skew_lo);
        }
        if let OrderSizeModel::GammaMixture { weight, scale1, scale2, .. } = params.order_size_model {
            genes.extend([weight, scale1, scale2]);
        }
        Ok(genes)
    }
}

fn default_constant_size() -> u64 {
    1
}
fn default_realisations() -> usize {
    1
}
fn default_delta_minutes() -> u32 {
    1
}
fn default_sim() -> SimConfig {
    let mut sim = SimConfig::new(3060, 0);
    sim.record_activity = false;
    sim
}

/// Search-space description read from a bounds file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSetup {
    #[serde(default)]
    pub variant: ModelVariant,
    pub l_p: usize,
    pub l_d: usize,
    #[serde(default = "default_constant_size")]
    pub constant_size: u64,
    /// `[lower, upper]` per gene name.
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub kernel: KernelSettings,
    /// Simulation settings shared by every evaluation; the seed is replaced
    /// by the evaluation seed.
    #[serde(default = "default_sim")]
    pub sim: SimConfig,
    /// Realisations pooled per objective evaluation.
    #[serde(default = "default_realisations")]
    pub realisations: usize,
    #[serde(default = "default_delta_minutes")]
    pub delta_minutes: u32,
}

impl CalibrationSetup {
    pub fn layout(&self) -> Result<GeneLayout> {
        GeneLayout::new(self.variant, self.l_p, self.l_d, self.constant_size)
    }

    /// Bounds in gene order; every layout gene must be bounded and no
    /// unknown names are accepted.
    pub fn gene_bounds(&self) -> Result<Bounds> {
        let layout = self.layout()?;
        if let Some(extra) = self.bounds.keys().find(|k| !layout.names().contains(k)) {
            return Err(Error::InvalidConfig(format!("unknown bounded parameter `{extra}`")));
        }
        let params = layout
            .names()
            .iter()
            .map(|name| {
                let [lower, upper] = *self
                    .bounds
                    .get(name)
                    .ok_or_else(|| Error::InvalidConfig(format!("missing bounds for `{name}`")))?;
                Ok(ParamBound { name: name.clone(), lower, upper })
            })
            .collect::<Result<Vec<_>>>()?;
        Bounds::new(params)
    }

    pub fn validate(&self) -> Result<()> {
        self.gene_bounds()?;
        self.sim.validate()?;
        if self.realisations == 0 {
            return Err(Error::InvalidConfig("at least one realisation per evaluation is required".into()));
        }
        Ok(())
    }
}

/// Squared L2 gaps of the volatility block and the volume block.
pub fn coefficient_distance(simulated: &AuxCoefficients, target: &AuxCoefficients) -> [f64; 2] {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    [sq(&simulated.beta1, &target.beta1), sq(&simulated.beta2, &target.beta2)]
}

/// Simulates `m` realisations and returns their auxiliary series. Each
/// realisation gets its own stream derived from `seed`.
pub fn simulate_series(
    theta: &AgentParams,
    sim: &SimConfig,
    m: usize,
    seed: u64,
    delta_minutes: u32,
) -> Result<Vec<AuxSeries>> {
    (0..m)
        .map(|r| {
            let mut cfg = sim.clone();
            cfg.seed = derive_seed(seed, r as u64);
            cfg.record_activity = false;
            let res = simulate(theta, &cfg)?;
            transform(&res.snapshots, theta.l_d, delta_minutes)
        })
        .collect()
}

/// Pooled auxiliary coefficients of `m` simulated realisations.
pub fn simulated_coefficients(
    theta: &AgentParams,
    sim: &SimConfig,
    m: usize,
    seed: u64,
    delta_minutes: u32,
) -> Result<AuxCoefficients> {
    let series = simulate_series(theta, sim, m, seed, delta_minutes)?;
    let fit = fit_auxiliary(&series)?;
    let c = fit.coefficients;
    if c.to_vec().iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSeries("non-finite auxiliary coefficient".into()));
    }
    Ok(c)
}

/// Objective pair for one parameter set. Any simulation or fitting failure
/// yields the penalty pair with `failed` set.
pub fn objective_vector(
    theta: &AgentParams,
    target: &AuxCoefficients,
    sim: &SimConfig,
    m: usize,
    seed: u64,
    delta_minutes: u32,
) -> Evaluation {
    match simulated_coefficients(theta, sim, m.max(1), seed, delta_minutes) {
        Ok(c) => Evaluation { objectives: coefficient_distance(&c, target).to_vec(), failed: false },
        Err(_) => Evaluation::penalty(2),
    }
}

/// The agent model wired into the generic search.
pub struct LobProblem {
    pub layout: GeneLayout,
    pub bounds: Bounds,
    pub target: AuxCoefficients,
    pub setup: CalibrationSetup,
}

impl LobProblem {
    pub fn new(setup: CalibrationSetup, target: AuxCoefficients) -> Result<Self> {
        setup.validate()?;
        Ok(Self { layout: setup.layout()?, bounds: setup.gene_bounds()?, target, setup })
    }

    pub fn decode(&self, genes: &[f64], sigma: Option<&DMatrix<f64>>) -> Result<AgentParams> {
        let sigma = sigma.ok_or_else(|| Error::InvalidConfig("covariance block missing".into()))?;
        self.layout.decode(genes, sigma)
    }
}

impl Problem for LobProblem {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn covariance_dim(&self) -> Option<usize> {
        Some(self.layout.levels())
    }

    fn evaluate(&self, genes: &[f64], sigma: Option<&DMatrix<f64>>, seed: u64) -> Evaluation {
        match self.decode(genes, sigma) {
            Ok(theta) => objective_vector(
                &theta,
                &self.target,
                &self.setup.sim,
                self.setup.realisations,
                seed,
                self.setup.delta_minutes,
            ),
            Err(_) => Evaluation::penalty(2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(b1: [f64; 3], b2: [f64; 4]) -> AuxCoefficients {
        AuxCoefficients { beta1: b1, beta2: b2 }
    }

    #[test]
    fn distance_examples() {
        let t = coeffs([1.0, 2.0, 4.0], [0.1, 0.2, 0.3, 0.4]);
        assert_eq!(coefficient_distance(&t, &t), [0.0, 0.0]);
        let s = coeffs([1.0, 2.0, 3.0], [0.1, 0.2, 0.3, 0.4]);
        assert_eq!(coefficient_distance(&s, &t), [1.0, 0.0]);
    }

    #[test]
    fn layout_round_trip() {
        for (sizes, skew, len) in [
            (SizeVariant::Constant, SkewVariant::Scalar, 6),
            (SizeVariant::GammaMixture, SkewVariant::Scalar, 9),
            (SizeVariant::Constant, SkewVariant::PerLevel, 14),
            (SizeVariant::GammaMixture, SkewVariant::PerLevel, 17),
        ] {
            let layout = GeneLayout::new(ModelVariant { sizes, skew }, 5, 3, 2).unwrap();
            assert_eq!(layout.len(), len);
            let genes: Vec<f64> = (0..len).map(|i| 0.3 + i as f64 * 0.05).collect();
            let sigma = DMatrix::<f64>::identity(8, 8) * 0.5;
            let params = layout.decode(&genes, &sigma).unwrap();
            assert_eq!(layout.encode(&params).unwrap(), genes);
            assert_eq!(params.mu0_c_passive, params.mu0_lo_passive);
            assert!((params.sigma_trace() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn per_level_names_follow_relative_levels() {
        let v = ModelVariant { sizes: SizeVariant::Constant, skew: SkewVariant::PerLevel };
        let layout = GeneLayout::new(v, 5, 3, 1).unwrap();
        assert_eq!(layout.names()[6], "gamma_lo_L-2");
        assert_eq!(layout.names()[13], "gamma_lo_L5");
    }

    #[test]
    fn bounds_must_cover_layout() {
        let mut setup: CalibrationSetup = serde_json::from_str(
            r#"{"l_p":5,"l_d":3,"bounds":{"mu0_lo_passive":[0.1,50],"mu0_lo_direct":[0.1,10],
                "mu0_mo":[0.1,10],"gamma0":[-10,10],"nu":[2.1,50],"sigma_mo":[0.1,10]}}"#,
        )
        .unwrap();
        assert_eq!(setup.gene_bounds().unwrap().len(), 6);
        assert_eq!(setup.sim.intervals, 3060);
        setup.bounds.remove("nu");
        assert!(matches!(setup.gene_bounds(), Err(Error::InvalidConfig(_))));
        setup.bounds.insert("nu".into(), [2.1, 50.0]);
        setup.bounds.insert("bogus".into(), [0.0, 1.0]);
        assert!(matches!(setup.gene_bounds(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn decode_rejects_invalid_parameters() {
        let layout = GeneLayout::new(ModelVariant::default(), 5, 3, 1).unwrap();
        let sigma = DMatrix::<f64>::identity(8, 8);
        assert!(layout.decode(&[1.0, 1.0, 1.0, 0.0, -1.0, 1.0], &sigma).is_err());
        assert!(layout.decode(&[1.0; 5], &sigma).is_err());
    }
}
