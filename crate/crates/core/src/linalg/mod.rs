//! Dense linear algebra and Gaussian utilities shared by the other modules.

mod cholesky;
mod eigen;
mod gauss;
mod lyapunov;
mod matrix;

pub use cholesky::{logdet_pd, Cholesky, PIVOT_TOL, SYMMETRY_TOL};
pub use eigen::spectral_radius;
pub use gauss::{gaussian_bc, GaussianSpec};
pub use lyapunov::solve_discrete_lyapunov;
pub use matrix::Matrix;
