//! Network-level converse bounds.
//!
//! [`direct_network_bound`] combines per-pair coefficients with the edge
//! weights of the prior. [`side_info_rhos`] and [`side_info_bound`] estimate
//! the side-information bound for a prior by Monte Carlo: each trial draws
//! the signs and the support off one uniformly chosen pair `(i, j)`, builds
//! the two adjacencies that differ only in `χ_ij`, and evaluates the
//! Bhattacharyya coefficient of the two exact observation laws.
//! [`roc_upper_envelope`] turns a bound curve `L(π)` into an upper bound on
//! the ROC through `π ε⁻ + (1−π) ε⁺ ≥ L(π)`.

use rand::Rng;
use rayon::prelude::*;

use crate::bht::bound_radical;
use crate::error::{Error, Result};
use crate::linalg::{gaussian_bc, GaussianSpec, Matrix};
use crate::metrics::RocPoint;
use crate::model::{
    observation_covariance, sample_signed_support, scale_to_radius, AdjacencyMatrix, ModelParams,
};
use crate::rng::derive_rng;

const WEIGHT_TOL: f64 = 1e-12;

/// Normalized per-pair weights of edges (`w_minus`) and non-edges (`w_plus`).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    pub w_minus: Matrix,
    pub w_plus: Matrix,
}

/// Weights from the marginal edge probabilities `P{A_ij ≠ 0}`.
pub fn edge_weights(edge_probs: &Matrix) -> Result<EdgeWeights> {
    if !edge_probs.is_square() {
        return Err(Error::Dimension("edge probabilities must be square".into()));
    }
    if edge_probs.as_slice().iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument("edge probabilities must lie in [0, 1]".into()));
    }
    let edges: f64 = edge_probs.as_slice().iter().sum();
    let non_edges: f64 = edge_probs.as_slice().iter().map(|p| 1.0 - p).sum();
    if edges <= 0.0 {
        return Err(Error::DegeneratePrior("no pair can carry an edge".into()));
    }
    if non_edges <= 0.0 {
        return Err(Error::DegeneratePrior("every pair is an edge almost surely".into()));
    }
    Ok(EdgeWeights {
        w_minus: edge_probs.scale(1.0 / edges),
        w_plus: edge_probs.map(|p| (1.0 - p) / non_edges),
    })
}

/// `½ Σ_ij (1 − √(1 − 4π(1−π)ρ_ij²)) · min(w⁻_ij, w⁺_ij)`.
pub fn direct_network_bound(rhos: &Matrix, weights: &EdgeWeights, pi: f64) -> Result<f64> {
    if rhos.rows() != weights.w_minus.rows() || rhos.cols() != weights.w_minus.cols() {
        return Err(Error::Dimension("rho matrix and weights differ in shape".into()));
    }
    let mut acc = 0.0;
    for i in 0..rhos.rows() {
        for j in 0..rhos.cols() {
            let w = weights.w_minus[(i, j)].min(weights.w_plus[(i, j)]);
            if w == 0.0 {
                continue;
            }
            acc += (1.0 - bound_radical(rhos[(i, j)], pi)?) * w;
        }
    }
    Ok(0.5 * acc)
}

/// Monte Carlo estimate of a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    pub value: f64,
    /// Standard error of `value`.
    pub stderr: f64,
    pub trials: usize,
}

/// Strictly increasing values of the prior `π` inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiGrid(Vec<f64>);

impl PiGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty pi grid".into()));
        }
        if values.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::InvalidArgument("pi grid values must lie in (0, 1)".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("pi grid must be strictly increasing".into()));
        }
        Ok(Self(values))
    }

    /// `count` equally spaced points from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let step = (hi - lo) / (count - 1) as f64;
        Self::new((0..count).map(|k| lo + step * k as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for PiGrid {
    /// 21 points from 0.025 to 0.975.
    fn default() -> Self {
        Self::linspace(0.025, 0.975, 21).expect("valid default grid")
    }
}

/// A prior that, per trial, yields the two adjacencies conditioned on the
/// absence and presence of one edge with everything else held fixed.
pub trait ConditionalEdgePrior: Sync {
    fn n(&self) -> usize;
    fn sample_pair(&self, rng: &mut dyn rand::RngCore) -> Result<(AdjacencyMatrix, AdjacencyMatrix)>;
}

/// Dynamic ER prior conditioned on `(R, χ_{-ij})` with `(i, j)` uniform.
#[derive(Debug, Clone, Copy)]
pub struct DynamicEr {
    pub n: usize,
    pub p: f64,
    pub r0: f64,
}

impl DynamicEr {
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            n: params.n,
            p: params.p,
            r0: params.r0,
        }
    }
}

impl ConditionalEdgePrior for DynamicEr {
    fn n(&self) -> usize {
        self.n
    }

    fn sample_pair(&self, rng: &mut dyn rand::RngCore) -> Result<(AdjacencyMatrix, AdjacencyMatrix)> {
        let mut signed = sample_signed_support(self.n, self.p, rng);
        let i = rng.random_range(0..self.n);
        let j = rng.random_range(0..self.n);
        // each hypothesis is rescaled on its own: the scale depends on the whole pattern
        signed.support.set(i, j, false);
        let a0 = scale_to_radius(&signed.pattern(), self.r0)?;
        signed.support.set(i, j, true);
        let a1 = scale_to_radius(&signed.pattern(), self.r0)?;
        Ok((AdjacencyMatrix::new(a0)?, AdjacencyMatrix::new(a1)?))
    }
}

/// A fixed pair of hypotheses, e.g. the single-edge two-vertex prior.
#[derive(Debug, Clone)]
pub struct FixedPair {
    pub absent: AdjacencyMatrix,
    pub present: AdjacencyMatrix,
}

impl ConditionalEdgePrior for FixedPair {
    fn n(&self) -> usize {
        self.absent.n()
    }

    fn sample_pair(&self, _rng: &mut dyn rand::RngCore) -> Result<(AdjacencyMatrix, AdjacencyMatrix)> {
        Ok((self.absent.clone(), self.present.clone()))
    }
}

/// Bhattacharyya coefficient of the observation laws under two networks.
pub fn observation_bc(a0: &AdjacencyMatrix, a1: &AdjacencyMatrix, params: &ModelParams) -> Result<f64> {
    let c0 = observation_covariance(a0, params)?;
    let c1 = observation_covariance(a1, params)?;
    gaussian_bc(&GaussianSpec::zero_mean(c0)?, &GaussianSpec::zero_mean(c1)?)
}

/// Bhattacharyya coefficient for the single-edge prior computed from the
/// exact observation covariances of the empty network and the network with
/// edge `1 → 2` of weight `a`, with `σ² = 1` and `ν² = noise_ratio`.
pub fn example1_covariance_rho(a: f64, noise_ratio: f64, horizon: usize) -> Result<f64> {
    let params = ModelParams {
        n: 2,
        horizon,
        sigma2: 1.0,
        nu2: noise_ratio,
        p: 0.5,
        r0: 0.5,
    };
    let a0 = AdjacencyMatrix::new(Matrix::zeros(2, 2))?;
    let a1 = AdjacencyMatrix::new(Matrix::from_rows(&[&[0.0, a], &[0.0, 0.0]]))?;
    observation_bc(&a0, &a1, &params)
}

/// Per-trial coefficients for the side-information bound. Trial `k` uses
/// the stream `("side-info", k)` under `master_seed`; results are in trial
/// order whatever the thread count.
pub fn side_info_rhos<P: ConditionalEdgePrior + ?Sized>(
    prior: &P,
    params: &ModelParams,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if prior.n() != params.n {
        return Err(Error::Dimension(format!(
            "prior over {} vertices with n = {}",
            prior.n(),
            params.n
        )));
    }
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = derive_rng(master_seed, "side-info", &[k as u64]);
            let (a0, a1) = prior.sample_pair(&mut rng)?;
            observation_bc(&a0, &a1, params).map_err(|e| e.context(format!("side-info trial {k}")))
        })
        .collect()
}

/// `½(1 − mean_k √(1 − 4π(1−π)ρ_k²))` with its standard error.
pub fn side_info_bound_from_rhos(rhos: &[f64], pi: f64) -> Result<BoundEstimate> {
    let trials = rhos.len();
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {trials}")));
    }
    let summands = rhos
        .iter()
        .map(|&rho| bound_radical(rho, pi))
        .collect::<Result<Vec<_>>>()?;
    let mean = summands.iter().sum::<f64>() / trials as f64;
    let var = summands.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(BoundEstimate {
        value: 0.5 * (1.0 - mean),
        stderr: 0.5 * (var / trials as f64).sqrt(),
        trials,
    })
}

/// Side-information bound for the dynamic ER prior at one `π`.
pub fn side_info_bound(params: &ModelParams, pi: f64, trials: usize, master_seed: u64) -> Result<BoundEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {trials}")));
    }
    let rhos = side_info_rhos(&DynamicEr::from_params(params), params, trials, master_seed)?;
    side_info_bound_from_rhos(&rhos, pi)
}

/// The bound over a whole `π` grid, sharing one set of trials.
pub fn side_info_curve<P: ConditionalEdgePrior + ?Sized>(
    prior: &P,
    params: &ModelParams,
    grid: &PiGrid,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<BoundEstimate>> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 trials, got {trials}")));
    }
    let rhos = side_info_rhos(prior, params, trials, master_seed)?;
    grid.values()
        .iter()
        .map(|&pi| side_info_bound_from_rhos(&rhos, pi))
        .collect()
}

/// Upper bound on the TPR at false positive ratio `fpr`, and the index of
/// the grid `π` attaining it.
pub fn envelope_at(grid: &PiGrid, bounds: &[f64], fpr: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (k, (&pi, &l)) in grid.values().iter().zip(bounds).enumerate() {
        let tpr = 1.0 - (l - (1.0 - pi) * fpr) / pi;
        if tpr < best.0 {
            best = (tpr, k);
        }
    }
    (best.0.clamp(fpr, 1.0), best.1)
}

/// How far an estimated ROC point sits above the envelope built from
/// Monte Carlo bounds, with the standard error of that difference.
///
/// The error combines the point's FPR and TPR errors with the bound error
/// at the minimizing `π`, propagated through the supporting line.
pub fn envelope_excess(
    grid: &PiGrid,
    bounds: &[BoundEstimate],
    point: RocPoint,
    fpr_stderr: f64,
    tpr_stderr: f64,
) -> (f64, f64) {
    let values: Vec<f64> = bounds.iter().map(|b| b.value).collect();
    let (env, k) = envelope_at(grid, &values, point.fpr);
    let pi = grid.values()[k];
    let se = (tpr_stderr.powi(2)
        + (bounds[k].stderr / pi).powi(2)
        + ((1.0 - pi) / pi * fpr_stderr).powi(2))
    .sqrt();
    (point.tpr - env, se)
}

/// `TPR_ub(x) = clamp_[x, 1] min_π (1 − (L(π) − (1−π) x) / π)` on `fpr_grid`.
pub fn roc_upper_envelope(grid: &PiGrid, bounds: &[f64], fpr_grid: &[f64]) -> Result<Vec<RocPoint>> {
    if bounds.len() != grid.values().len() {
        return Err(Error::Dimension(format!(
            "{} bound values for {} grid points",
            bounds.len(),
            grid.values().len()
        )));
    }
    for (&pi, &l) in grid.values().iter().zip(bounds) {
        if !(l >= 0.0 && l <= pi.min(1.0 - pi) + WEIGHT_TOL) {
            return Err(Error::InvalidArgument(format!(
                "bound {l} at pi = {pi} outside [0, min(pi, 1 - pi)]"
            )));
        }
    }
    Ok(fpr_grid
        .iter()
        .map(|&fpr| RocPoint {
            fpr,
            tpr: envelope_at(grid, bounds, fpr).0,
        })
        .collect())
}
