use super::{spectral_radius, Matrix};
use crate::error::{Error, Result};

const STEP_TOL: f64 = 1e-14;
const MAX_ITERS: usize = 1_000_000;

/// Solves `Q = Aᵀ Q A + c I` for stable `A` (row-vector dynamics
/// `x(t) = x(t-1) A + w(t)` with `Cov w = c I`).
///
/// Fixed-point iteration from `Q₀ = c I`; the error contracts like `r(A)²`
/// per step. Stops once the max-norm step falls below `1e-14 · max(1, |Q|)`.
pub fn solve_discrete_lyapunov(a: &Matrix, c: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "Lyapunov equation for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise variance {c} must be positive")));
    }
    let r = spectral_radius(a)?;
    if r >= 1.0 {
        return Err(Error::Unstable(r));
    }
    let n = a.rows();
    let mut q = Matrix::identity(n).scale(c);
    for _ in 0..MAX_ITERS {
        let mut next = a.t_matmul(&q.matmul(a)?)?;
        next.add_diag(c);
        let next = next.symmetrized();
        let step = next.sub(&q)?.max_abs();
        q = next;
        if step < STEP_TOL * q.max_abs().max(1.0) {
            return Ok(q);
        }
    }
    Err(Error::NoConvergence(format!(
        "Lyapunov fixed point after {MAX_ITERS} iterations (r(A) = {r})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_dynamics_give_scaled_identity() {
        let q = solve_discrete_lyapunov(&Matrix::zeros(2, 2), 1.0).unwrap();
        assert_eq!(q, Matrix::identity(2));
    }

    #[test]
    fn scalar_case() {
        let q = solve_discrete_lyapunov(&Matrix::from_rows(&[&[0.5]]), 1.0).unwrap();
        assert_abs_diff_eq!(q[(0, 0)], 4.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn single_edge_case() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let q = solve_discrete_lyapunov(&a, 1.0).unwrap();
        assert_eq!(q, Matrix::from_diag(&[1.0, 2.0]));
    }

    #[test]
    fn rejects_unstable() {
        let a = Matrix::from_rows(&[&[0.0, 2.0], &[1.5, 0.0]]);
        assert!(matches!(solve_discrete_lyapunov(&a, 1.0), Err(Error::Unstable(_))));
        assert!(solve_discrete_lyapunov(&Matrix::zeros(2, 2), 0.0).is_err());
    }
}
