use super::Matrix;
use crate::error::{Error, Result};

/// Inputs are accepted as symmetric when `max |M - Mᵀ| <= SYMMETRY_TOL`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Pivots at or below this value mark the matrix as not positive definite.
pub const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factorizes a symmetric matrix. The input is symmetrized before the
    /// factorization so asymmetry below [`SYMMETRY_TOL`] never matters.
    pub fn new(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "Cholesky of a {}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        let asym = m.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let n = m.rows();
        let mut l = m.symmetrized();
        for j in 0..n {
            let mut pivot = l[(j, j)];
            for k in 0..j {
                pivot -= l[(j, k)] * l[(j, k)];
            }
            if pivot <= PIVOT_TOL || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { index: j, pivot });
            }
            let d = pivot.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = l[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
            for k in (j + 1)..n {
                l[(j, k)] = 0.0;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    pub fn logdet(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(b.len(), n);
        let mut z = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s: f64 = row[..i].iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / row[i];
        }
        z
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        let mut x = self.solve_lower(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }
}

/// `log det M` of a symmetric positive-definite matrix.
pub fn logdet_pd(m: &Matrix) -> Result<f64> {
    Ok(Cholesky::new(m)?.logdet())
}
