use super::DesignPair;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{ObservationSeries, SupportMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoConfig {
    pub lambda: f64,
    /// Stop once the largest coefficient change in a sweep is below this.
    pub tol: f64,
    /// Maximum number of coordinate-descent sweeps.
    pub max_iters: usize,
    /// Coefficients with magnitude at or below this are reported as zero.
    pub zero_threshold: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            tol: 1e-10,
            max_iters: 100_000,
            zero_threshold: 1e-10,
        }
    }
}

impl LassoConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda = {} must be >= 0", self.lambda)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol = {} must be > 0", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    /// False when `max_iters` ran out before the tolerance was met.
    pub converged: bool,
}

fn soft_threshold(x: f64, level: f64) -> f64 {
    if x > level {
        x - level
    } else if x < -level {
        x + level
    } else {
        0.0
    }
}

/// `(1/2T) |y − X b|² + λ |b|₁`.
pub fn lasso_objective(x: &Matrix, y: &[f64], b: &[f64], lambda: f64) -> f64 {
    let t = x.rows() as f64;
    let fitted = x.mul_vec(b).expect("shapes checked by caller");
    let rss: f64 = y.iter().zip(&fitted).map(|(a, f)| (a - f).powi(2)).sum();
    rss / (2.0 * t) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

/// Cyclic coordinate descent for column `j` of the lagged regression.
pub fn lasso_column(design: &DesignPair, j: usize, cfg: &LassoConfig) -> Result<LassoFit> {
    cfg.validate()?;
    let y = design.target(j)?;
    let x = design.phi0();
    let (t, n) = (x.rows(), x.cols());
    let tf = t as f64;
    let cols: Vec<Vec<f64>> = (0..n).map(|i| design.regressor(i)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / tf).collect();

    let mut b = vec![0.0; n];
    let mut resid = y.clone();
    #[cfg(debug_assertions)]
    let mut last_obj = lasso_objective(x, &y, &b, cfg.lambda);

    for sweep in 1..=cfg.max_iters {
        let mut max_change: f64 = 0.0;
        for k in 0..n {
            if norms[k] == 0.0 {
                continue;
            }
            let old = b[k];
            let corr = cols[k].iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / tf;
            let new = soft_threshold(corr + norms[k] * old, cfg.lambda) / norms[k];
            let delta = new - old;
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(&cols[k]) {
                    *r -= delta * a;
                }
                b[k] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        #[cfg(debug_assertions)]
        {
            let obj = lasso_objective(x, &y, &b, cfg.lambda);
            debug_assert!(
                obj <= last_obj + 1e-12 * last_obj.abs().max(1.0),
                "lasso objective increased from {last_obj} to {obj}"
            );
            last_obj = obj;
        }
        if max_change < cfg.tol {
            return Ok(LassoFit {
                coefficients: b,
                sweeps: sweep,
                converged: true,
            });
        }
    }
    Ok(LassoFit {
        coefficients: b,
        sweeps: cfg.max_iters,
        converged: false,
    })
}

/// Estimated support with the coefficient matrix it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoSupport {
    pub support: SupportMatrix,
    pub coefficients: Matrix,
    /// Columns whose fit stopped at `max_iters`.
    pub unconverged: Vec<usize>,
}

pub fn lasso_support(series: &ObservationSeries, cfg: &LassoConfig) -> Result<LassoSupport> {
    let design = DesignPair::from_series(series)?;
    let n = design.n();
    let mut coefficients = Matrix::zeros(n, n);
    let mut unconverged = Vec::new();
    for j in 0..n {
        let fit = lasso_column(&design, j, cfg)?;
        if !fit.converged {
            unconverged.push(j);
        }
        for (i, &c) in fit.coefficients.iter().enumerate() {
            coefficients[(i, j)] = c;
        }
    }
    let support = SupportMatrix::from_fn(n, |i, j| coefficients[(i, j)].abs() > cfg.zero_threshold);
    Ok(LassoSupport {
        support,
        coefficients,
        unconverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Cholesky;
    use approx::assert_abs_diff_eq;

    fn design_from(phi0: Matrix, y: &[f64]) -> DesignPair {
        let n = phi0.cols();
        let phi1 = Matrix::from_fn(phi0.rows(), n, |r, c| if c == 0 { y[r] } else { 0.0 });
        DesignPair::new(phi0, phi1).unwrap()
    }

    fn toy() -> (Matrix, Vec<f64>) {
        let x = Matrix::from_rows(&[
            &[1.0, 0.3, -0.2],
            &[0.5, -1.0, 0.4],
            &[-0.7, 0.2, 1.1],
            &[0.9, 0.8, 0.1],
            &[-0.3, -0.6, -0.9],
            &[0.2, 1.2, 0.5],
        ]);
        let y = vec![1.2, -0.4, 0.3, 1.9, -1.1, 1.0];
        (x, y)
    }

    #[test]
    fn unregularized_matches_normal_equations() {
        let (x, y) = toy();
        let d = design_from(x.clone(), &y);
        let fit = lasso_column(&d, 0, &LassoConfig::with_lambda(0.0)).unwrap();
        assert!(fit.converged);
        let gram = x.t_matmul(&x).unwrap();
        let xty = x.transpose().mul_vec(&y).unwrap();
        let direct = Cholesky::new(&gram).unwrap().solve(&xty);
        for (a, b) in fit.coefficients.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3));
        }
        // residual orthogonal to every column
        let fitted = x.mul_vec(&fit.coefficients).unwrap();
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
        for k in 0..3 {
            let dot: f64 = x.column(k).iter().zip(&resid).map(|(a, r)| a * r).sum();
            assert!(dot.abs() < 1e-6);
        }
    }

    #[test]
    fn large_lambda_gives_zero() {
        let (x, y) = toy();
        let t = x.rows() as f64;
        let lambda_max = (0..3)
            .map(|k| x.column(k).iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().abs() / t)
            .fold(0.0, f64::max);
        let d = design_from(x, &y);
        let fit = lasso_column(&d, 0, &LassoConfig::with_lambda(lambda_max)).unwrap();
        assert!(fit.coefficients.iter().all(|&c| c == 0.0));
        let below = lasso_column(&d, 0, &LassoConfig::with_lambda(0.99 * lambda_max)).unwrap();
        assert!(below.coefficients.iter().any(|&c| c != 0.0));
    }

    #[test]
    fn orthogonal_design_soft_thresholds_ols() {
        // columns orthogonal with squared norm T = 4
        let x = Matrix::from_rows(&[
            &[1.0, 1.0, 1.0],
            &[1.0, -1.0, 1.0],
            &[1.0, 1.0, -1.0],
            &[1.0, -1.0, -1.0],
        ]);
        let y = [2.0, 0.4, 1.0, -0.6];
        let ols: Vec<f64> = (0..3)
            .map(|k| x.column(k).iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / 4.0)
            .collect();
        let lambda = 0.3;
        let fit = lasso_column(&design_from(x, &y), 0, &LassoConfig::with_lambda(lambda)).unwrap();
        for (b, o) in fit.coefficients.iter().zip(&ols) {
            assert_abs_diff_eq!(*b, soft_threshold(*o, lambda), epsilon = 1e-12);
        }
    }

    #[test]
    fn objective_not_worse_than_zero() {
        let (x, y) = toy();
        let d = design_from(x.clone(), &y);
        for lambda in [0.0, 0.01, 0.1, 0.5] {
            let fit = lasso_column(&d, 0, &LassoConfig::with_lambda(lambda)).unwrap();
            assert!(
                lasso_objective(&x, &y, &fit.coefficients, lambda)
                    <= lasso_objective(&x, &y, &[0.0; 3], lambda) + 1e-15
            );
        }
    }

    #[test]
    fn exhausted_sweeps_are_flagged() {
        let (x, y) = toy();
        let cfg = LassoConfig {
            max_iters: 1,
            tol: 1e-300,
            ..LassoConfig::with_lambda(0.0)
        };
        let fit = lasso_column(&design_from(x, &y), 0, &cfg).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.sweeps, 1);
    }

    #[test]
    fn rejects_bad_config() {
        let (x, y) = toy();
        let d = design_from(x, &y);
        assert!(lasso_column(&d, 0, &LassoConfig::with_lambda(-1.0)).is_err());
        assert!(lasso_column(&d, 7, &LassoConfig::default()).is_err());
    }
}
