//! The generative model: signed Erdős–Rényi priors rescaled to a target
//! spectral radius, stationary linear Gaussian trajectories with additive
//! observation noise, and the exact joint covariance of the observations.
//!
//! Dynamics use row vectors: `X(t) = X(t-1) A + W(t)`, `Y(t) = X(t) + Z(t)`,
//! so entry `(i, j)` of `A` weights the edge `i → j`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{solve_discrete_lyapunov, spectral_radius, Cholesky, Matrix};

/// Parameters of the dynamic ER prior and the observation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Number of vertices.
    pub n: usize,
    /// Time horizon; observations are taken at `0..=horizon`.
    pub horizon: usize,
    /// Driving-noise variance σ².
    pub sigma2: f64,
    /// Observation-noise variance ν².
    pub nu2: f64,
    /// Edge probability.
    pub p: f64,
    /// Target spectral radius.
    pub r0: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad(format!("sigma2 = {} must be positive", self.sigma2));
        }
        if !(self.nu2 >= 0.0 && self.nu2.is_finite()) {
            return bad(format!("nu2 = {} must be nonnegative", self.nu2));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} must lie in [0, 1]", self.p));
        }
        if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return bad(format!("r0 = {} must lie in (0, 1)", self.r0));
        }
        Ok(())
    }
}

/// Binary support pattern of an `n × n` adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl SupportMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: vec![false; n * n],
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            entries: vec![true; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, entries }
    }

    /// Nonzero pattern of a matrix.
    pub fn of(m: &Matrix) -> Self {
        assert!(m.is_square());
        Self::from_fn(m.rows(), |i, j| m[(i, j)] != 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.entries[i * self.n + j] = value;
    }

    pub fn count(&self) -> usize {
        self.entries.iter().filter(|&&b| b).count()
    }

    pub fn density(&self) -> f64 {
        self.count() as f64 / (self.n * self.n) as f64
    }

    /// Row indices `i` with `(i, j)` set: the parents of vertex `j`.
    pub fn column_support(&self, j: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.get(i, j)).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| if self.get(i, j) { 1.0 } else { 0.0 })
    }
}

/// Weighted adjacency; entry `(i, j)` is the coefficient of edge `i → j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix(Matrix);

impl AdjacencyMatrix {
    pub fn new(weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Dimension(format!(
                "adjacency must be square, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &Matrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn support(&self) -> SupportMatrix {
        SupportMatrix::of(&self.0)
    }
}

/// Independent Rademacher signs and Bernoulli support of a signed ER draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedSupport {
    pub signs: Matrix,
    pub support: SupportMatrix,
}

impl SignedSupport {
    /// The entrywise product `signs ∘ support`.
    pub fn pattern(&self) -> Matrix {
        let n = self.support.n();
        Matrix::from_fn(n, n, |i, j| {
            if self.support.get(i, j) {
                self.signs[(i, j)]
            } else {
                0.0
            }
        })
    }
}

/// Noisy observations, row `t` holding `Y(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    samples: Matrix,
}

impl ObservationSeries {
    pub fn new(samples: Matrix) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &Matrix {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.samples.cols()
    }

    /// Number of transitions `T` (the series holds `T + 1` rows).
    pub fn horizon(&self) -> usize {
        self.samples.rows() - 1
    }
}

/// `r0 · A / r(A)`, or `A` itself when `r(A) = 0`.
pub fn scale_to_radius(a: &Matrix, r0: f64) -> Result<Matrix> {
    let r = spectral_radius(a)?;
    if r == 0.0 {
        Ok(a.clone())
    } else {
        Ok(a.scale(r0 / r))
    }
}

/// Independent Rademacher signs and Bernoulli(`p`) support.
///
/// Entries are visited in row-major order; each consumes one sign draw then
/// one support draw, signs being drawn even where the support is empty.
pub fn sample_signed_support<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> SignedSupport {
    let mut signs = Matrix::zeros(n, n);
    let mut support = SupportMatrix::empty(n);
    for i in 0..n {
        for j in 0..n {
            signs[(i, j)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
            support.set(i, j, rng.random::<f64>() < p);
        }
    }
    SignedSupport { signs, support }
}

/// Draws one network from the dynamic ER prior.
pub fn sample_dynamic_er<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<(SignedSupport, AdjacencyMatrix)> {
    params.validate()?;
    let signed = sample_signed_support(params.n, params.p, rng);
    let adjacency = AdjacencyMatrix::new(scale_to_radius(&signed.pattern(), params.r0)?)?;
    Ok((signed, adjacency))
}

fn check_stable(a: &AdjacencyMatrix) -> Result<()> {
    let r = spectral_radius(a.weights())?;
    if r >= 1.0 {
        return Err(Error::Unstable(r));
    }
    Ok(())
}

/// Simulates `Y(0..=T)` from the stationary process driven by `a`.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    params: &ModelParams,
    rng: &mut R,
) -> Result<ObservationSeries> {
    params.validate()?;
    if a.n() != params.n {
        return Err(Error::Dimension(format!(
            "adjacency of order {} for n = {}",
            a.n(),
            params.n
        )));
    }
    check_stable(a)?;
    let n = params.n;
    let w = a.weights();
    let q = solve_discrete_lyapunov(w, params.sigma2)?;
    let chol = Cholesky::new(&q)?;
    let sigma = params.sigma2.sqrt();
    let nu = params.nu2.sqrt();

    let normals = |len: usize, rng: &mut R| -> Vec<f64> {
        (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    };

    let mut samples = Matrix::zeros(params.horizon + 1, n);
    let z0 = normals(n, rng);
    let mut x = chol.factor().mul_vec(&z0)?;
    for t in 0..=params.horizon {
        if t > 0 {
            let drive = normals(n, rng);
            x = w.left_mul_vec(&x)?;
            for (xi, d) in x.iter_mut().zip(&drive) {
                *xi += sigma * d;
            }
        }
        let obs = normals(n, rng);
        for i in 0..n {
            samples[(t, i)] = x[i] + nu * obs[i];
        }
    }
    Ok(ObservationSeries::new(samples))
}

/// Exact covariance of the stacked observations `(Y(0), …, Y(T))`.
///
/// Block `(s, t)` with `s ≤ t` is `Q A^(t−s)`, plus `ν² I` on the diagonal;
/// the lower blocks are the transposes.
pub fn observation_covariance(a: &AdjacencyMatrix, params: &ModelParams) -> Result<Matrix> {
    params.validate()?;
    if a.n() != params.n {
        return Err(Error::Dimension(format!(
            "adjacency of order {} for n = {}",
            a.n(),
            params.n
        )));
    }
    check_stable(a)?;
    let n = params.n;
    let steps = params.horizon + 1;
    let w = a.weights();
    let q = solve_discrete_lyapunov(w, params.sigma2)?;
    let mut out = Matrix::zeros(n * steps, n * steps);
    let mut lagged = q.clone();
    for lag in 0..steps {
        let mut block = lagged.clone();
        if lag == 0 {
            block.add_diag(params.nu2);
        }
        let block_t = block.transpose();
        for s in 0..(steps - lag) {
            let t = s + lag;
            out.set_block(s * n, t * n, &block);
            if lag > 0 {
                out.set_block(t * n, s * n, &block_t);
            }
        }
        if lag + 1 < steps {
            lagged = lagged.matmul(w)?;
        }
    }
    Ok(out)
}

/// Covariance of `X(T)` started from `X(0) = 0`:
/// `σ² Σ_{m<T} (A^m)ᵀ A^m`.
pub fn zero_start_covariance(a: &Matrix, sigma2: f64, horizon: usize) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} dynamics", a.rows(), a.cols())));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("zero-start covariance needs T >= 1".into()));
    }
    let n = a.rows();
    let mut power = Matrix::identity(n);
    let mut acc = Matrix::zeros(n, n);
    for m in 0..horizon {
        acc = acc.add(&power.t_matmul(&power)?)?;
        if m + 1 < horizon {
            power = power.matmul(a)?;
        }
    }
    Ok(acc.scale(sigma2).symmetrized())
}
