use super::{Cholesky, Matrix, SYMMETRY_TOL};
use crate::error::{Error, Result};

/// Overshoot above 1 that is attributed to rounding and clamped away.
const BC_CLAMP_TOL: f64 = 1e-12;

/// A multivariate normal law given by its mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    covariance: Matrix,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if !covariance.is_square() || covariance.rows() != mean.len() {
            return Err(Error::Dimension(format!(
                "mean of length {} with a {}x{} covariance",
                mean.len(),
                covariance.rows(),
                covariance.cols()
            )));
        }
        let asym = covariance.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { mean, covariance })
    }

    pub fn zero_mean(covariance: Matrix) -> Result<Self> {
        Self::new(vec![0.0; covariance.rows()], covariance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }
}

/// Bhattacharyya coefficient between two Gaussians, evaluated in log space
/// from three Cholesky factorizations.
///
/// `ρ = exp(−⅛ Δμᵀ S⁻¹ Δμ + ¼ log|Σ₁| + ¼ log|Σ₂| − ½ log|S|)`, `S = (Σ₁+Σ₂)/2`.
pub fn gaussian_bc(p: &GaussianSpec, q: &GaussianSpec) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension(format!(
            "Gaussians of dimension {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let c1 = Cholesky::new(p.covariance())?;
    let c2 = Cholesky::new(q.covariance())?;
    let avg = p.covariance().add(q.covariance())?.scale(0.5);
    let cs = Cholesky::new(&avg)?;
    let delta: Vec<f64> = p.mean.iter().zip(&q.mean).map(|(a, b)| a - b).collect();
    let mahalanobis = if delta.iter().all(|&d| d == 0.0) {
        0.0
    } else {
        cs.solve_lower(&delta).iter().map(|z| z * z).sum()
    };
    let log_rho = -mahalanobis / 8.0 + 0.25 * c1.logdet() + 0.25 * c2.logdet() - 0.5 * cs.logdet();
    let rho = log_rho.exp();
    if rho > 1.0 + BC_CLAMP_TOL {
        return Err(Error::InvalidArgument(format!(
            "Bhattacharyya coefficient {rho} exceeds 1 beyond rounding"
        )));
    }
    Ok(rho.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(mean: f64, var: f64) -> GaussianSpec {
        GaussianSpec::new(vec![mean], Matrix::from_rows(&[&[var]])).unwrap()
    }

    #[test]
    fn identical_laws() {
        let g = GaussianSpec::new(
            vec![1.0, -2.0],
            Matrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]),
        )
        .unwrap();
        assert_eq!(gaussian_bc(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn shifted_means() {
        // exp(-Δμ²/8) with unit variances
        let rho = gaussian_bc(&scalar(0.0, 1.0), &scalar(2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(rho, (-0.5_f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(rho, 0.606531, epsilon = 1e-6);
    }

    #[test]
    fn different_variances() {
        // sqrt(2^(1/4) / sqrt(1.5))... written as (1·2)^(1/4) / 1.5^(1/2)
        let rho = gaussian_bc(&scalar(0.0, 1.0), &scalar(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(rho, 2.0_f64.powf(0.25) / 1.5_f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(rho, 0.970983, epsilon = 1e-6);
    }

    #[test]
    fn rejects_mismatch_and_non_pd() {
        let a = scalar(0.0, 1.0);
        let b = GaussianSpec::zero_mean(Matrix::identity(2)).unwrap();
        assert!(matches!(gaussian_bc(&a, &b), Err(Error::Dimension(_))));
        let bad = GaussianSpec::zero_mean(Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap();
        assert!(matches!(
            gaussian_bc(&b, &bad),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(GaussianSpec::new(vec![0.0], Matrix::identity(2)).is_err());
    }
}
