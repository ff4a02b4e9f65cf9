//! Support recovery from an observed series: column-wise lasso by
//! coordinate descent and the greedy forward oCSE variant with a
//! permutation-test stopping rule.
//!
//! Both regress `Y(t)` on `Y(t−1)` without intercept; the process is
//! mean-zero.

mod lasso;
mod ocse;

pub use lasso::{lasso_column, lasso_objective, lasso_support, LassoConfig, LassoFit, LassoSupport};
pub use ocse::{ocse_parents, ocse_support, OcseConfig, OcseParents, OcseSupport};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::ObservationSeries;

/// Lagged design: `phi0` holds `Y(0..T)`, `phi1` holds `Y(1..=T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPair {
    phi0: Matrix,
    phi1: Matrix,
}

impl DesignPair {
    pub fn new(phi0: Matrix, phi1: Matrix) -> Result<Self> {
        if phi0.rows() != phi1.rows() || phi0.cols() != phi1.cols() {
            return Err(Error::Dimension(format!(
                "design blocks {}x{} and {}x{}",
                phi0.rows(),
                phi0.cols(),
                phi1.rows(),
                phi1.cols()
            )));
        }
        Ok(Self { phi0, phi1 })
    }

    pub fn from_series(series: &ObservationSeries) -> Result<Self> {
        let y = series.samples();
        let t = y.rows().saturating_sub(1);
        if t == 0 {
            return Err(Error::InvalidArgument("series needs at least two time points".into()));
        }
        let n = y.cols();
        Self::new(y.block(0, 0, t, n), y.block(1, 0, t, n))
    }

    pub fn phi0(&self) -> &Matrix {
        &self.phi0
    }

    pub fn phi1(&self) -> &Matrix {
        &self.phi1
    }

    /// Number of regression rows `T`.
    pub fn rows(&self) -> usize {
        self.phi0.rows()
    }

    pub fn n(&self) -> usize {
        self.phi0.cols()
    }

    pub(crate) fn regressor(&self, i: usize) -> Vec<f64> {
        self.phi0.column(i)
    }

    pub(crate) fn target(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.n() {
            return Err(Error::Dimension(format!("target column {j} of {}", self.n())));
        }
        Ok(self.phi1.column(j))
    }
}
