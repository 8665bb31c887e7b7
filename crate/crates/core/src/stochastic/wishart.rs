use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::skew_t::cholesky;
use crate::error::{Error, Result};

/// Inverse-Wishart draw with scale `Ψ` and real degrees of freedom `p > d − 1`,
/// via a Bartlett factor of `Wishart(Ψ⁻¹, p)` followed by inversion.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(scale: &DMatrix<f64>, dof: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    let d = scale.nrows();
    if d == 0 {
        return Err(Error::InvalidConfig("inverse-Wishart dimension must be positive".into()));
    }
    if !(dof > (d as f64) - 1.0) {
        return Err(Error::InvalidConfig(format!("inverse-Wishart dof {dof} must exceed {}", d - 1)));
    }
    let precision = cholesky(scale)?.inverse();
    let l = cholesky(&symmetrise(&precision))?.l();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let chi2 = Gamma::new((dof - i as f64) / 2.0, 2.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        a[(i, i)] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let x = l * a;
    let wishart = &x * x.transpose();
    let inv = cholesky(&symmetrise(&wishart))?.inverse();
    let out = symmetrise(&inv);
    cholesky(&out)?;
    Ok(out)
}

pub(crate) fn symmetrise(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
