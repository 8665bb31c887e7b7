use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of the share count attached to a single order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderSizeModel {
    Constant { size: u64 },
    /// `w·Gamma(κ1, θ1) + (1 − w)·Gamma(κ2, θ2)`, rounded up.
    GammaMixture { weight: f64, shape1: f64, scale1: f64, shape2: f64, scale2: f64 },
}

impl OrderSizeModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { size } if size >= 1 => Ok(()),
            Self::Constant { .. } => Err(Error::InvalidConfig("constant order size must be at least 1".into())),
            Self::GammaMixture { weight, shape1, scale1, shape2, scale2 } => {
                if !(0.0..=1.0).contains(&weight) {
                    return Err(Error::InvalidConfig(format!("mixture weight {weight} outside [0, 1]")));
                }
                for (name, v) in [("shape1", shape1), ("scale1", scale1), ("shape2", shape2), ("scale2", scale2)] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::InvalidConfig(format!("gamma {name} must be positive, got {v}")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Mean of the continuous law before rounding.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Constant { size } => size as f64,
            Self::GammaMixture { weight, shape1, scale1, shape2, scale2 } => {
                weight * shape1 * scale1 + (1.0 - weight) * shape2 * scale2
            }
        }
    }

    pub fn sampler(&self) -> Result<OrderSizeSampler> {
        self.validate()?;
        Ok(match *self {
            Self::Constant { size } => OrderSizeSampler::Constant(size),
            Self::GammaMixture { weight, shape1, scale1, shape2, scale2 } => OrderSizeSampler::Mixture {
                weight,
                first: Gamma::new(shape1, scale1).map_err(|e| Error::InvalidConfig(e.to_string()))?,
                second: Gamma::new(shape2, scale2).map_err(|e| Error::InvalidConfig(e.to_string()))?,
            },
        })
    }
}

/// Pre-built sampler for an [`OrderSizeModel`].
#[derive(Debug, Clone)]
pub enum OrderSizeSampler {
    Constant(u64),
    Mixture { weight: f64, first: Gamma<f64>, second: Gamma<f64> },
}

impl OrderSizeSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Self::Constant(c) => *c,
            Self::Mixture { weight, first, second } => {
                let u: f64 = rng.random();
                let x = if u < *weight { first.sample(rng) } else { second.sample(rng) };
                (x.ceil() as u64).max(1)
            }
        }
    }
}

pub fn sample_order_size<R: Rng + ?Sized>(model: &OrderSizeModel, rng: &mut R) -> Result<u64> {
    Ok(model.sampler()?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn constant_sizes() {
        let mut rng = stream(1);
        let m = OrderSizeModel::Constant { size: 1 };
        assert!((0..100).all(|_| sample_order_size(&m, &mut rng).unwrap() == 1));
        assert!(OrderSizeModel::Constant { size: 0 }.validate().is_err());
    }

    #[test]
    fn exponential_ceiling_mean() {
        let m = OrderSizeModel::GammaMixture { weight: 1.0, shape1: 1.0, scale1: 100.0, shape2: 2.0, scale2: 50.0 };
        let s = m.sampler().unwrap();
        let mut rng = stream(2);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        // ceil of Exp(100) is geometric on {1, 2, …} with success 1 - e^{-1/100}
        let oracle = 1.0 / (1.0 - (-0.01_f64).exp());
        assert!((mean - oracle).abs() < 3.0 * sd / (n as f64).sqrt(), "mean {mean}");
        assert!(xs.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn second_component_mode() {
        let m = OrderSizeModel::GammaMixture { weight: 0.0, shape1: 1.0, scale1: 1.0, shape2: 2.0, scale2: 50.0 };
        let s = m.sampler().unwrap();
        let mut rng = stream(3);
        let mut hist = vec![0usize; 60];
        for _ in 0..100_000 {
            let x = s.sample(&mut rng) as usize;
            if x <= 600 {
                hist[(x - 1) / 10] += 1;
            }
        }
        let mode_bin = hist.iter().enumerate().max_by_key(|(_, c)| **c).unwrap().0;
        let centre = mode_bin as f64 * 10.0 + 5.5;
        assert!((centre - 50.0).abs() <= 20.0, "mode bin centre {centre}");
    }

    #[test]
    fn invalid_mixture() {
        let m = OrderSizeModel::GammaMixture { weight: 1.2, shape1: 1.0, scale1: 1.0, shape2: 2.0, scale2: 1.0 };
        assert!(m.validate().is_err());
    }

    #[test]
    fn serde_tagging() {
        let m: OrderSizeModel = serde_json::from_str(r#"{"kind":"constant","size":3}"#).unwrap();
        assert_eq!(m, OrderSizeModel::Constant { size: 3 });
    }
}
