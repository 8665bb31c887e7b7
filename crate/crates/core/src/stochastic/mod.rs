//! Probability kernels used by the agents and the calibrator.

mod order_size;
mod poisson;
mod skew_t;
pub mod special;
mod wishart;

pub use order_size::{sample_order_size, OrderSizeModel, OrderSizeSampler};
pub use poisson::{sample_poisson, sample_poisson_vector, sample_truncated_poisson, truncated_poisson_pmf};
pub use skew_t::{cholesky, sample_skew_t, skew_t_log_density, SkewT, SkewTParams};
pub use special::normal_cdf;
pub use wishart::sample_inverse_wishart;
pub(crate) use wishart::symmetrise;

/// Elementwise `μ0_s · Φ(γ_s)`.
pub fn intensity_transform(gamma: &[f64], mu0: &[f64]) -> Vec<f64> {
    gamma.iter().zip(mu0).map(|(&g, &m)| m * normal_cdf(g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intensity_landmarks() {
        assert_eq!(intensity_transform(&[0.0, 0.0], &[4.0, 10.0]), vec![2.0, 5.0]);
        let hi = intensity_transform(&[40.0], &[3.0])[0];
        let lo = intensity_transform(&[-40.0], &[3.0])[0];
        assert!((hi - 3.0).abs() < 1e-12 && lo < 1e-12);
        let l = intensity_transform(&[-1.6449], &[10.0])[0];
        assert!((l - 0.5).abs() < 1e-4);
    }
}
