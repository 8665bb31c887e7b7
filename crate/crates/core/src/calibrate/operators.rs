//! Variation operators on bounded real genes.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Named box constraint on one scalar gene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBound {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub params: Vec<ParamBound>,
}

impl Bounds {
    pub fn new(params: Vec<ParamBound>) -> crate::Result<Self> {
        for p in &params {
            if !(p.lower < p.upper) || !p.lower.is_finite() || !p.upper.is_finite() {
                return Err(crate::Error::InvalidConfig(format!(
                    "bound for {} must satisfy lower < upper, got [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
        }
        Ok(Self { params })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn clamp(&self, genes: &mut [f64]) {
        for (g, b) in genes.iter_mut().zip(&self.params) {
            *g = g.clamp(b.lower, b.upper);
        }
    }

    pub fn contains(&self, genes: &[f64]) -> bool {
        genes.len() == self.len() && genes.iter().zip(&self.params).all(|(g, b)| (b.lower..=b.upper).contains(g))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.params.iter().map(|b| b.lower + (b.upper - b.lower) * rng.random::<f64>()).collect()
    }
}

/// Inverse CDF of the SBX spread factor: `P(α ≤ 1) = 1/2`, density
/// `½(η+1)α^η` below 1 and `½(η+1)/α^{η+2}` above.
pub fn sbx_alpha(u: f64, eta: f64) -> f64 {
    if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    }
}

/// Children for one gene given the spread factor.
pub fn sbx_blend(x1: f64, x2: f64, alpha: f64) -> (f64, f64) {
    (0.5 * ((1.0 - alpha) * x1 + (1.0 + alpha) * x2), 0.5 * ((1.0 + alpha) * x1 + (1.0 - alpha) * x2))
}

pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: &Bounds,
    eta_c: f64,
    p_c: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for k in 0..p1.len() {
        if rng.random::<f64>() < p_c {
            let alpha = sbx_alpha(rng.random(), eta_c);
            (c1[k], c2[k]) = sbx_blend(p1[k], p2[k], alpha);
        }
    }
    bounds.clamp(&mut c1);
    bounds.clamp(&mut c2);
    (c1, c2)
}

/// Polynomial-mutation step as a fraction of the bound width.
pub fn polynomial_delta(gamma: f64, eta: f64) -> f64 {
    if gamma < 0.5 {
        (2.0 * gamma).powf(1.0 / (eta + 1.0)) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - gamma)).powf(1.0 / (eta + 1.0))
    }
}

pub fn polynomial_mutation<R: Rng + ?Sized>(genes: &[f64], bounds: &Bounds, eta_m: f64, p_m: f64, rng: &mut R) -> Vec<f64> {
    let mut out = genes.to_vec();
    for (k, b) in bounds.params.iter().enumerate() {
        if rng.random::<f64>() < p_m {
            out[k] += polynomial_delta(rng.random(), eta_m) * (b.upper - b.lower);
        }
    }
    bounds.clamp(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn unit_bounds(n: usize) -> Bounds {
        Bounds::new((0..n).map(|i| ParamBound { name: format!("x{i}"), lower: -10.0, upper: 10.0 }).collect()).unwrap()
    }

    #[test]
    fn unit_alpha_swaps() {
        assert_eq!(sbx_blend(1.5, -2.0, 1.0), (-2.0, 1.5));
        assert_eq!(sbx_alpha(0.5, 5.0), 1.0);
    }

    #[test]
    fn equal_parents_unchanged() {
        let mut rng = stream(1);
        let b = unit_bounds(4);
        let p = vec![1.0, -3.0, 0.5, 9.0];
        let (c1, c2) = sbx_crossover(&p, &p, &b, 5.0, 1.0, &mut rng);
        for k in 0..4 {
            assert!((c1[k] - p[k]).abs() < 1e-12 && (c2[k] - p[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_distribution() {
        let mut rng = stream(2);
        let n = 100_000;
        let eta = 5.0;
        let alphas: Vec<f64> = (0..n).map(|_| sbx_alpha(rng.random(), eta)).collect();
        let below = alphas.iter().filter(|&&a| a < 1.0).count() as f64 / n as f64;
        assert!((below - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
        // P(α ≤ 0.8) = ½ 0.8^{η+1}
        let p = 0.5 * 0.8_f64.powf(eta + 1.0);
        let f = alphas.iter().filter(|&&a| a <= 0.8).count() as f64 / n as f64;
        assert!((f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
        // P(α > 1.2) = ½ 1.2^{-(η+1)}
        let p = 0.5 * 1.2_f64.powf(-(eta + 1.0));
        let f = alphas.iter().filter(|&&a| a > 1.2).count() as f64 / n as f64;
        assert!((f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn delta_limits_and_mean() {
        assert_eq!(polynomial_delta(0.5, 10.0), 0.0);
        assert!((polynomial_delta(1e-300, 10.0) + 1.0).abs() < 1e-2);
        let b = Bounds::new(vec![ParamBound { name: "x".into(), lower: 0.0, upper: 1.0 }]).unwrap();
        let mut g = [0.3 + polynomial_delta(0.0, 10.0)];
        b.clamp(&mut g);
        assert_eq!(g[0], 0.0);
        let mut rng = stream(3);
        let n = 100_000;
        let deltas: Vec<f64> = (0..n).map(|_| polynomial_delta(rng.random(), 10.0)).collect();
        let mean = deltas.iter().sum::<f64>() / n as f64;
        let sd = (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn offspring_stay_in_bounds() {
        let mut rng = stream(4);
        let b = unit_bounds(3);
        for _ in 0..1000 {
            let p1 = b.sample_uniform(&mut rng);
            let p2 = b.sample_uniform(&mut rng);
            let (c1, c2) = sbx_crossover(&p1, &p2, &b, 5.0, 0.7, &mut rng);
            let m = polynomial_mutation(&c1, &b, 10.0, 0.2, &mut rng);
            assert!(b.contains(&c1) && b.contains(&c2) && b.contains(&m));
        }
    }
}
