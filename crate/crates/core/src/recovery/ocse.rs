use rand::seq::SliceRandom;
use rand::Rng;

use super::DesignPair;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::model::{ObservationSeries, SupportMatrix};
use crate::rng::derive_rng;

/// Gram pivots below this fraction of the matching diagonal entry are
/// treated as collinear.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcseConfig {
    /// Significance level of the permutation test.
    pub theta: f64,
    pub num_perms: usize,
    /// Cap on the parent-set size; `None` means no cap beyond `n`.
    pub max_parents: Option<usize>,
}

impl Default for OcseConfig {
    fn default() -> Self {
        Self {
            theta: 0.05,
            num_perms: 100,
            max_parents: None,
        }
    }
}

impl OcseConfig {
    pub fn with_theta(theta: f64) -> Self {
        Self {
            theta,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidArgument(format!("theta = {} must lie in (0, 1)", self.theta)));
        }
        if self.num_perms < 20 {
            return Err(Error::InvalidArgument(format!(
                "num_perms = {} must be at least 20",
                self.num_perms
            )));
        }
        Ok(())
    }

    /// Zero-based index into the ascending permuted improvements of the
    /// empirical `(1 − θ)` quantile: `⌈(1 − θ) m⌉ − 1`.
    fn quantile_index(&self) -> usize {
        let m = self.num_perms;
        let rank = ((1.0 - self.theta) * m as f64 - 1e-9).ceil() as usize;
        rank.clamp(1, m) - 1
    }
}

/// Residual sum of squares of `y` regressed on `cols`, or `None` when the
/// columns are collinear.
fn rss(cols: &[&[f64]], y: &[f64]) -> Option<f64> {
    let yy: f64 = y.iter().map(|v| v * v).sum();
    if cols.is_empty() {
        return Some(yy);
    }
    let k = cols.len();
    let gram = Matrix::from_fn(k, k, |a, b| cols[a].iter().zip(cols[b]).map(|(u, v)| u * v).sum());
    let chol = Cholesky::new(&gram).ok()?;
    let l = chol.factor();
    if (0..k).any(|i| l[(i, i)] * l[(i, i)] <= RANK_TOL * gram[(i, i)]) {
        return None;
    }
    let xty: Vec<f64> = cols.iter().map(|c| c.iter().zip(y).map(|(u, v)| u * v).sum()).collect();
    let z = chol.solve_lower(&xty);
    Some((yy - z.iter().map(|v| v * v).sum::<f64>()).max(0.0))
}

/// Parent set for one target, in order of discovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcseParents {
    pub parents: Vec<usize>,
    /// Candidates dropped because they were collinear with the chosen set.
    pub skipped: Vec<usize>,
}

/// Greedy forward selection of the parents of vertex `j`.
///
/// Each round picks the unchosen column of `Φ(0)` whose addition most
/// reduces the residual sum of squares (lowest index on ties), then permutes
/// that column's rows `num_perms` times. The candidate is kept only if its
/// improvement strictly exceeds the empirical `(1 − θ)` quantile of the
/// permuted improvements; the first rejection ends the search.
pub fn ocse_parents<R: Rng + ?Sized>(
    design: &DesignPair,
    j: usize,
    cfg: &OcseConfig,
    rng: &mut R,
) -> Result<OcseParents> {
    cfg.validate()?;
    let t = design.rows();
    if t < 2 {
        return Err(Error::InvalidArgument(format!("oCSE needs T >= 2, got {t}")));
    }
    let y = design.target(j)?;
    let n = design.n();
    let cap = cfg.max_parents.unwrap_or(n).min(n);
    let cols: Vec<Vec<f64>> = (0..n).map(|i| design.regressor(i)).collect();

    let mut chosen: Vec<usize> = Vec::new();
    let mut skipped: Vec<usize> = Vec::new();
    let mut current = rss(&[], &y).expect("empty design");
    let q_idx = cfg.quantile_index();
    let mut shuffled = vec![0.0; t];
    let mut order: Vec<usize> = (0..t).collect();

    // T rows support at most T − 1 regressors
    while chosen.len() < cap && chosen.len() + 2 <= t {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..n {
            if chosen.contains(&k) || skipped.contains(&k) {
                continue;
            }
            let mut set: Vec<&[f64]> = chosen.iter().map(|&c| cols[c].as_slice()).collect();
            set.push(&cols[k]);
            match rss(&set, &y) {
                Some(r) => {
                    let gain = current - r;
                    if best.is_none_or(|(_, g)| gain > g) {
                        best = Some((k, gain));
                    }
                }
                None => skipped.push(k),
            }
        }
        let Some((cand, gain)) = best else { break };

        let mut permuted = Vec::with_capacity(cfg.num_perms);
        for _ in 0..cfg.num_perms {
            order.shuffle(rng);
            for (dst, &src) in shuffled.iter_mut().zip(&order) {
                *dst = cols[cand][src];
            }
            let mut set: Vec<&[f64]> = chosen.iter().map(|&c| cols[c].as_slice()).collect();
            set.push(&shuffled);
            // a collinear permutation explains nothing extra
            permuted.push(rss(&set, &y).map_or(0.0, |r| current - r));
        }
        permuted.sort_by(f64::total_cmp);
        if gain > permuted[q_idx] {
            chosen.push(cand);
            let set: Vec<&[f64]> = chosen.iter().map(|&c| cols[c].as_slice()).collect();
            current = rss(&set, &y).expect("accepted set has full rank");
        } else {
            break;
        }
    }
    Ok(OcseParents {
        parents: chosen,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcseSupport {
    pub support: SupportMatrix,
    pub parents: Vec<OcseParents>,
}

/// Runs [`ocse_parents`] for every target; target `j` draws its
/// permutations from the stream `("ocse", j)` under `seed`.
pub fn ocse_support(series: &ObservationSeries, cfg: &OcseConfig, seed: u64) -> Result<OcseSupport> {
    let design = DesignPair::from_series(series)?;
    let n = design.n();
    let mut support = SupportMatrix::empty(n);
    let mut parents = Vec::with_capacity(n);
    for j in 0..n {
        let mut rng = derive_rng(seed, "ocse", &[j as u64]);
        let found = ocse_parents(&design, j, cfg, &mut rng)?;
        for &i in &found.parents {
            support.set(i, j, true);
        }
        parents.push(found);
    }
    Ok(OcseSupport { support, parents })
}
