//! Recovery metrics: aggregate error ratios, ROC sweeps of the two
//! estimators, AUC upper bounds, and the mutual incoherence parameter.

use rayon::prelude::*;

use crate::bht::lb_direct;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::model::{sample_dynamic_er, simulate_trajectory, zero_start_covariance, ModelParams, SupportMatrix};
use crate::net_bounds::{roc_upper_envelope, PiGrid};
use crate::recovery::{lasso_support, ocse_support, LassoConfig, OcseConfig};
use crate::rng::derive_rng;

/// A point in ROC space: false positive ratio and true positive ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Per-instance counts over all ordered pairs, self-pairs included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub missed_edges: usize,
    pub true_edges: usize,
    pub false_edges: usize,
    pub true_nonedges: usize,
}

impl ConfusionCounts {
    pub fn of(truth: &SupportMatrix, estimate: &SupportMatrix) -> Result<Self> {
        if truth.n() != estimate.n() {
            return Err(Error::Dimension(format!(
                "truth over {} vertices, estimate over {}",
                truth.n(),
                estimate.n()
            )));
        }
        let n = truth.n();
        let mut c = Self::default();
        for i in 0..n {
            for j in 0..n {
                match (truth.get(i, j), estimate.get(i, j)) {
                    (true, false) => {
                        c.true_edges += 1;
                        c.missed_edges += 1;
                    }
                    (true, true) => c.true_edges += 1,
                    (false, true) => {
                        c.true_nonedges += 1;
                        c.false_edges += 1;
                    }
                    (false, false) => c.true_nonedges += 1,
                }
            }
        }
        Ok(c)
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            missed_edges: self.missed_edges + other.missed_edges,
            true_edges: self.true_edges + other.true_edges,
            false_edges: self.false_edges + other.false_edges,
            true_nonedges: self.true_nonedges + other.true_nonedges,
        }
    }

    /// `(ε⁻, ε⁺)` as ratios of the summed counts.
    pub fn ratios(&self) -> Result<(f64, f64)> {
        if self.true_edges == 0 || self.true_nonedges == 0 {
            return Err(Error::DegenerateBatch(format!(
                "{} true edges and {} true non-edges in the batch",
                self.true_edges, self.true_nonedges
            )));
        }
        Ok((
            self.missed_edges as f64 / self.true_edges as f64,
            self.false_edges as f64 / self.true_nonedges as f64,
        ))
    }
}

/// `(ε⁻, ε⁺)` over a batch: ratios of expectations, not expected ratios.
pub fn error_ratios(truths: &[SupportMatrix], estimates: &[SupportMatrix]) -> Result<(f64, f64)> {
    if truths.len() != estimates.len() {
        return Err(Error::Dimension(format!(
            "{} truths for {} estimates",
            truths.len(),
            estimates.len()
        )));
    }
    let mut total = ConfusionCounts::default();
    for (t, e) in truths.iter().zip(estimates) {
        total = total.merge(ConfusionCounts::of(t, e)?);
    }
    total.ratios()
}

/// Which estimator a sweep runs; the grid value replaces `lambda` or `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Lasso(LassoConfig),
    Ocse(OcseConfig),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lasso(_) => "lasso",
            Algorithm::Ocse(_) => "ocse",
        }
    }
}

/// One ROC point of a sweep with standard errors of its coordinates,
/// computed from the per-simulation counts by linearizing the ratio
/// estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub point: RocPoint,
    pub fpr_stderr: f64,
    pub tpr_stderr: f64,
}

fn ratio_stderr(num: &[f64], den: &[f64]) -> f64 {
    let k = num.len();
    if k < 2 {
        return 0.0;
    }
    let mean_den = den.iter().sum::<f64>() / k as f64;
    if mean_den == 0.0 {
        return 0.0;
    }
    let r = num.iter().sum::<f64>() / den.iter().sum::<f64>();
    let ss: f64 = num.iter().zip(den).map(|(m, e)| ((m - r * e) / mean_den).powi(2)).sum();
    (ss / ((k - 1) * k) as f64).sqrt()
}

/// Simulates `sims` networks and trajectories and runs the estimator at
/// every grid value on the same data.
///
/// Simulation `s` draws its network and trajectory from the stream
/// `("roc-data", s)` and its permutations (oCSE) from seeds derived from
/// `("roc-ocse", s)`, so the data are shared across grid values and across
/// the two estimators.
pub fn roc_sweep(
    algorithm: Algorithm,
    grid: &[f64],
    params: &ModelParams,
    sims: usize,
    master_seed: u64,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() || sims == 0 {
        return Err(Error::InvalidArgument("roc sweep needs a grid and at least one simulation".into()));
    }
    params.validate()?;
    let per_sim: Vec<Vec<ConfusionCounts>> = (0..sims)
        .into_par_iter()
        .map(|s| {
            let mut rng = derive_rng(master_seed, "roc-data", &[s as u64]);
            let (signed, adjacency) = sample_dynamic_er(params, &mut rng)?;
            let series = simulate_trajectory(&adjacency, params, &mut rng)?;
            let ocse_seed = derive_rng(master_seed, "roc-ocse", &[s as u64]).next_u64_seed();
            grid.iter()
                .map(|&value| {
                    let estimate = match algorithm {
                        Algorithm::Lasso(cfg) => {
                            lasso_support(&series, &LassoConfig { lambda: value, ..cfg })?.support
                        }
                        Algorithm::Ocse(cfg) => {
                            ocse_support(&series, &OcseConfig { theta: value, ..cfg }, ocse_seed)?.support
                        }
                    };
                    ConfusionCounts::of(&signed.support, &estimate)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.context(format!("{} sweep, simulation {s}", algorithm.name())))
        })
        .collect::<Result<Vec<_>>>()?;

    grid.iter()
        .enumerate()
        .map(|(g, &param)| {
            let counts: Vec<ConfusionCounts> = per_sim.iter().map(|row| row[g]).collect();
            let total = counts.iter().fold(ConfusionCounts::default(), |a, &b| a.merge(b));
            let (eps_minus, eps_plus) = total.ratios()?;
            let col = |f: fn(&ConfusionCounts) -> usize| -> Vec<f64> { counts.iter().map(|c| f(c) as f64).collect() };
            Ok(SweepPoint {
                param,
                point: RocPoint {
                    fpr: eps_plus,
                    tpr: 1.0 - eps_minus,
                },
                fpr_stderr: ratio_stderr(&col(|c| c.false_edges), &col(|c| c.true_nonedges)),
                tpr_stderr: ratio_stderr(&col(|c| c.missed_edges), &col(|c| c.true_edges)),
            })
        })
        .collect()
}

trait SeedFromStream {
    fn next_u64_seed(self) -> u64;
}

impl SeedFromStream for crate::rng::StreamRng {
    fn next_u64_seed(mut self) -> u64 {
        rand::Rng::random(&mut self)
    }
}

/// `1 − ρ⁴/6`.
pub fn auc_bound_simple(rho: f64) -> f64 {
    1.0 - rho.powi(4) / 6.0
}

/// `1 − (1 − √(1 − ρ²))² / 2`.
pub fn auc_bound_shapiro(rho: f64) -> f64 {
    1.0 - (1.0 - (1.0 - rho * rho).max(0.0).sqrt()).powi(2) / 2.0
}

/// Trapezoidal integral of `ys` over the abscissae `xs`.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `count` equally spaced points on `[0, 1]`.
pub fn unit_grid(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count).map(|k| k as f64 / (count - 1) as f64).collect()
}

/// Default FPR grid for AUC integration: 201 equally spaced points.
pub fn default_fpr_grid() -> Vec<f64> {
    unit_grid(201)
}

/// Dense `π` grid for AUC bounds: 1999 interior points of a uniform
/// 0.0005 mesh plus geometric tails down to `1e-6` at both ends, where the
/// envelope at small FPR is decided.
pub fn default_auc_pi_grid() -> PiGrid {
    let mut v: Vec<f64> = (1..2000).map(|k| k as f64 / 2000.0).collect();
    for k in 0..60 {
        let t = 1e-6 * 10f64.powf(3.0 * k as f64 / 59.0);
        if t < 0.0005 {
            v.push(t);
            v.push(1.0 - t);
        }
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    PiGrid::new(v).expect("valid grid")
}

/// AUC of the ROC envelope implied by `L(π) = lb_direct(ρ, π)`.
pub fn auc_bound_numerical(rho: f64, fpr_grid: &[f64], pi_grid: &PiGrid) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside [0, 1]")));
    }
    if fpr_grid.len() < 2 || fpr_grid[0] != 0.0 || *fpr_grid.last().unwrap() != 1.0 {
        return Err(Error::InvalidArgument("fpr grid must run from 0 to 1".into()));
    }
    if fpr_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("fpr grid must be strictly increasing".into()));
    }
    let bounds = pi_grid
        .values()
        .iter()
        .map(|&pi| lb_direct(rho, pi))
        .collect::<Result<Vec<_>>>()?;
    let env = roc_upper_envelope(pi_grid, &bounds, fpr_grid)?;
    let tprs: Vec<f64> = env.iter().map(|p| p.tpr).collect();
    Ok(trapezoid(fpr_grid, &tprs))
}

/// `max_j max_{i ∉ S_j} ‖Q_{i,S_j} Q_{S_j,S_j}⁻¹‖₁`; empty `S_j` are skipped.
pub fn mip(q: &Matrix, supports: &[Vec<usize>]) -> Result<f64> {
    if !q.is_square() {
        return Err(Error::Dimension("covariance must be square".into()));
    }
    let n = q.rows();
    let mut worst: f64 = 0.0;
    for (j, set) in supports.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        if set.iter().any(|&i| i >= n) {
            return Err(Error::Dimension(format!("support of column {j} indexes past {n}")));
        }
        let chol = Cholesky::new(&q.select(set, set)).map_err(|e| e.context(format!("mip column {j}")))?;
        for i in (0..n).filter(|i| !set.contains(i)) {
            let row: Vec<f64> = set.iter().map(|&s| q[(s, i)]).collect();
            let w = chol.solve(&row);
            worst = worst.max(w.iter().map(|v| v.abs()).sum());
        }
    }
    Ok(worst)
}

/// Mean MIP at one horizon with its standard error over the draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MipPoint {
    pub horizon: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Average MIP of zero-start covariances for dynamic ER draws; `S_j` is the
/// parent set of vertex `j` in the drawn network. Draw `d` uses the stream
/// `("mip", d)`.
pub fn mip_curve(params: &ModelParams, horizons: &[usize], draws: usize, master_seed: u64) -> Result<Vec<MipPoint>> {
    if draws == 0 || horizons.is_empty() {
        return Err(Error::InvalidArgument("mip curve needs draws and horizons".into()));
    }
    let per_draw: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = derive_rng(master_seed, "mip", &[d as u64]);
            let (signed, adjacency) = sample_dynamic_er(params, &mut rng)?;
            let supports: Vec<Vec<usize>> = (0..params.n).map(|j| signed.support.column_support(j)).collect();
            horizons
                .iter()
                .map(|&h| mip(&zero_start_covariance(adjacency.weights(), params.sigma2, h)?, &supports))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.context(format!("mip draw {d}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(horizons
        .iter()
        .enumerate()
        .map(|(k, &horizon)| {
            let vals: Vec<f64> = per_draw.iter().map(|row| row[k]).collect();
            let mean = vals.iter().sum::<f64>() / draws as f64;
            let stderr = if draws > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64 / draws as f64).sqrt()
            } else {
                0.0
            };
            MipPoint { horizon, mean, stderr }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sm(n: usize, edges: &[(usize, usize)]) -> SupportMatrix {
        SupportMatrix::from_fn(n, |i, j| edges.contains(&(i, j)))
    }

    #[test]
    fn perfect_and_full_estimates() {
        let truth = sm(3, &[(0, 1), (2, 2)]);
        assert_eq!(error_ratios(std::slice::from_ref(&truth), std::slice::from_ref(&truth)).unwrap(), (0.0, 0.0));
        assert_eq!(error_ratios(&[truth], &[SupportMatrix::full(3)]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn hand_counted_batch() {
        // first: 2 edges, 1 missed; second: 1 edge, one false alarm among 3 non-edges
        let truths = [sm(2, &[(0, 1), (1, 0)]), sm(2, &[(0, 0)])];
        let estimates = [sm(2, &[(0, 1)]), sm(2, &[(0, 0), (1, 1)])];
        let (em, ep) = error_ratios(&truths, &estimates).unwrap();
        assert_abs_diff_eq!(em, 1.0 / 3.0, epsilon = 1e-15);
        // non-edges: 2 in the first, 3 in the second; one false alarm
        assert_abs_diff_eq!(ep, 1.0 / 5.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_batches() {
        let empty = SupportMatrix::empty(2);
        assert!(matches!(
            error_ratios(std::slice::from_ref(&empty), std::slice::from_ref(&empty)),
            Err(Error::DegenerateBatch(_))
        ));
        let full = SupportMatrix::full(2);
        assert!(error_ratios(std::slice::from_ref(&full), std::slice::from_ref(&full)).is_err());
        assert!(error_ratios(&[], &[SupportMatrix::full(2)]).is_err());
    }

    #[test]
    fn auc_closed_forms() {
        assert_eq!(auc_bound_simple(0.0), 1.0);
        assert_abs_diff_eq!(auc_bound_simple(1.0), 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(auc_bound_simple(0.5), 1.0 - 0.0625 / 6.0, epsilon = 1e-15);
        assert_eq!(auc_bound_shapiro(0.0), 1.0);
        assert_eq!(auc_bound_shapiro(1.0), 0.5);
        assert_abs_diff_eq!(auc_bound_shapiro(0.6), 0.98, epsilon = 1e-15);
    }

    #[test]
    fn auc_numerical_endpoints() {
        let xs = default_fpr_grid();
        let grid = default_auc_pi_grid();
        assert_abs_diff_eq!(auc_bound_numerical(0.0, &xs, &grid).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(auc_bound_numerical(1.0, &xs, &grid).unwrap(), 0.5, epsilon = 1e-9);
        assert!(auc_bound_numerical(1.5, &xs, &grid).is_err());
        assert!(auc_bound_numerical(0.5, &[0.0, 0.5], &grid).is_err());
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let xs = [0.0, 0.2, 0.7, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert_abs_diff_eq!(trapezoid(&xs, &ys), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mip_diagonal_cases() {
        let supports = vec![vec![1], vec![0, 2], vec![]];
        assert_eq!(mip(&Matrix::identity(3), &supports).unwrap(), 0.0);
        assert_eq!(mip(&Matrix::from_diag(&[2.0, 0.5, 3.0]), &supports).unwrap(), 0.0);
    }

    #[test]
    fn mip_small_case_by_hand() {
        // S = {0}: |Q_{i0} / Q_{00}| for i = 1, 2
        let q = Matrix::from_rows(&[&[2.0, 1.0, -0.5], &[1.0, 2.0, 0.0], &[-0.5, 0.0, 1.0]]);
        assert_abs_diff_eq!(mip(&q, &[vec![0]]).unwrap(), 0.5, epsilon = 1e-15);
        assert!(mip(&Matrix::zeros(2, 2), &[vec![0]]).is_err());
    }

    #[test]
    fn pi_grid_for_auc_is_dense() {
        let g = default_auc_pi_grid();
        assert!(g.values()[0] <= 1e-6 + 1e-18);
        assert!(g.values().len() > 2000);
    }
}
