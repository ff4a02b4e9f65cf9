//! Binary hypothesis testing bounds built on the Bhattacharyya coefficient.
//!
//! The bound kernels take `ρ` (or a list of weighted component `ρ`s) rather
//! than densities, so the same code serves finite distributions and
//! Gaussian laws. For prior `π` on `H₀`:
//!
//! ```text
//! π(1−π)ρ² ≤ ½(1 − √(1 − 4π(1−π)ρ²)) ≤ p_e ≤ √(π(1−π)) ρ
//! ```
//!
//! and for mixtures sharing the switch weights `α_s` the side-information
//! bound averages the middle term over components.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_bc, GaussianSpec};
use crate::rng::derive_rng;

/// Slack tolerated on probability sums and on `4π(1−π)ρ² ≤ 1`.
pub const PROB_TOL: f64 = 1e-12;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution(Vec<f64>);

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument(format!("probability {bad} is not a nonnegative real")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    /// Draws from the symmetric unit-parameter Dirichlet law by normalizing
    /// unit-rate exponentials.
    pub fn sample_dirichlet<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        assert!(dim >= 1);
        let draws: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        Self(draws.into_iter().map(|d| d / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `α·self + (1−α)·other`.
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self> {
        check_lengths(self, other)?;
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        ))
    }

    /// Product law on the Cartesian product of the two alphabets.
    pub fn product(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .flat_map(|a| other.0.iter().map(move |b| a * b))
                .collect(),
        )
    }
}

fn check_lengths(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::Dimension(format!(
            "distributions of length {} and {}",
            f.len(),
            g.len()
        )));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `Σ √(fᵢ gᵢ)`.
pub fn bhattacharyya(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<f64> {
    check_lengths(f, g)?;
    Ok(f.0.iter().zip(&g.0).map(|(a, b)| (a * b).sqrt()).sum())
}

/// Minimum average error probability `Σ min(π fᵢ, (1−π) gᵢ)`.
pub fn exact_pe(f: &DiscreteDistribution, g: &DiscreteDistribution, pi: f64) -> Result<f64> {
    check_lengths(f, g)?;
    check_unit("pi", pi)?;
    Ok(f.0
        .iter()
        .zip(&g.0)
        .map(|(a, b)| (pi * a).min((1.0 - pi) * b))
        .sum())
}

/// `√(1 − u)` for `u ∈ [0, 1]`, clamping rounding overshoot of `u`.
fn sqrt_one_minus(u: f64) -> Result<f64> {
    if !(0.0..=1.0 + PROB_TOL).contains(&u) {
        return Err(Error::InvalidArgument(format!(
            "radicand 1 - {u} outside [0, 1]; rho is invalid"
        )));
    }
    Ok((1.0 - u.min(1.0)).sqrt())
}

/// `√(1 − 4π(1−π)ρ²)`, the per-component term shared by all the lower
/// bounds.
pub fn bound_radical(rho: f64, pi: f64) -> Result<f64> {
    check_unit("pi", pi)?;
    if !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} is negative")));
    }
    sqrt_one_minus(4.0 * pi * (1.0 - pi) * rho * rho)
}

/// `½(1 − √(1 − 4π(1−π)ρ²))`.
pub fn lb_direct(rho: f64, pi: f64) -> Result<f64> {
    Ok(0.5 * (1.0 - bound_radical(rho, pi)?))
}

/// `π(1−π)ρ²`.
pub fn lb_weak(rho: f64, pi: f64) -> f64 {
    pi * (1.0 - pi) * rho * rho
}

/// `√(π(1−π)) ρ`.
pub fn ub_pe(rho: f64, pi: f64) -> f64 {
    (pi * (1.0 - pi)).sqrt() * rho
}

/// `½(1 − Σ α_s √(1 − 4π(1−π)ρ_s²))` from `(α_s, ρ_s)` pairs.
pub fn lb_side_info_from_rhos(components: &[(f64, f64)], pi: f64) -> Result<f64> {
    check_weights(components.iter().map(|c| c.0))?;
    let mut acc = 0.0;
    for &(alpha, rho) in components {
        acc += alpha * bound_radical(rho, pi)?;
    }
    Ok(0.5 * (1.0 - acc))
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for w in weights {
        if !(w >= 0.0) {
            return Err(Error::InvalidArgument(format!("mixture weight {w} is negative")));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("mixture needs at least one component".into()));
    }
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
    }
    Ok(())
}

/// A pair of laws whose Bhattacharyya coefficient can be evaluated.
pub trait BhattacharyyaPair {
    fn bc(&self, other: &Self) -> Result<f64>;
}

impl BhattacharyyaPair for DiscreteDistribution {
    fn bc(&self, other: &Self) -> Result<f64> {
        bhattacharyya(self, other)
    }
}

impl BhattacharyyaPair for GaussianSpec {
    fn bc(&self, other: &Self) -> Result<f64> {
        gaussian_bc(self, other)
    }
}

/// Mixtures `f = Σ α_s f_s`, `g = Σ α_s g_s` with shared weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePair<C> {
    weights: Vec<f64>,
    components: Vec<(C, C)>,
}

impl<C> MixturePair<C> {
    pub fn new(weights: Vec<f64>, components: Vec<(C, C)>) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        check_weights(weights.iter().copied())?;
        Ok(Self { weights, components })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[(C, C)] {
        &self.components
    }
}

impl MixturePair<DiscreteDistribution> {
    /// Checks that every component shares one alphabet size.
    pub fn discrete(
        weights: Vec<f64>,
        components: Vec<(DiscreteDistribution, DiscreteDistribution)>,
    ) -> Result<Self> {
        if let Some((f0, _)) = components.first() {
            let len = f0.len();
            if components.iter().any(|(f, g)| f.len() != len || g.len() != len) {
                return Err(Error::Dimension("mixture components differ in length".into()));
            }
        }
        Self::new(weights, components)
    }

    /// The mixed laws `(f, g)`.
    pub fn mixed(&self) -> (DiscreteDistribution, DiscreteDistribution) {
        let len = self.components[0].0.len();
        let mut f = vec![0.0; len];
        let mut g = vec![0.0; len];
        for (alpha, (fs, gs)) in self.weights.iter().zip(&self.components) {
            for i in 0..len {
                f[i] += alpha * fs.0[i];
                g[i] += alpha * gs.0[i];
            }
        }
        (DiscreteDistribution(f), DiscreteDistribution(g))
    }
}

/// Side-information lower bound for a mixture pair.
pub fn lb_side_info<C: BhattacharyyaPair>(mix: &MixturePair<C>, pi: f64) -> Result<f64> {
    let comps = mix
        .weights
        .iter()
        .zip(&mix.components)
        .map(|(&alpha, (f, g))| Ok((alpha, f.bc(g)?)))
        .collect::<Result<Vec<_>>>()?;
    lb_side_info_from_rhos(&comps, pi)
}

/// The two-vertex prior with a single candidate edge `1 → 2` of weight `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Params {
    /// Edge coefficient, nonzero.
    pub a: f64,
    /// Noise ratio `N = ν² / σ²`.
    pub noise_ratio: f64,
    pub horizon: usize,
    /// Prior probability of the edge.
    pub beta: f64,
}

impl Example1Params {
    pub fn validate(&self) -> Result<()> {
        if self.a == 0.0 || !self.a.is_finite() {
            return Err(Error::InvalidArgument("edge coefficient must be nonzero".into()));
        }
        if !(self.noise_ratio >= 0.0 && self.noise_ratio.is_finite()) {
            return Err(Error::InvalidArgument("noise ratio must be nonnegative".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument("beta must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Closed-form `(ρ₀, γ)` for the single-edge prior; `ρ = ρ₀ γ^T`.
///
/// `ρ₀` is the coefficient of the initial observation of the child and `γ`
/// that of each independent (parent at `t−1`, child at `t`) pair.
pub fn example1_factors(a: f64, noise_ratio: f64) -> (f64, f64) {
    let n = noise_ratio;
    let a2 = a * a;
    let rho0 = (((n + 1.0) * (n + 1.0 + a2)).sqrt() / (n + 1.0 + a2 / 2.0)).sqrt();
    let gamma = ((n + 1.0) * (n * n + (2.0 + a2) * n + 1.0).sqrt()
        / (n * n + (2.0 + a2 / 2.0) * n + 1.0 + a2 / 4.0))
        .sqrt();
    (rho0, gamma)
}

pub fn example1_rho(params: &Example1Params) -> Result<f64> {
    params.validate()?;
    let (rho0, gamma) = example1_factors(params.a, params.noise_ratio);
    Ok(rho0 * gamma.powi(params.horizon as i32))
}

/// The three-letter pair whose side-information bound beats the direct one.
pub fn example2_mixture() -> MixturePair<DiscreteDistribution> {
    let d = |v: Vec<f64>| DiscreteDistribution::new(v).expect("valid constant");
    MixturePair::discrete(
        vec![2.0 / 3.0, 1.0 / 3.0],
        vec![
            (d(vec![0.5, 0.0, 0.5]), d(vec![0.75, 0.0, 0.25])),
            (d(vec![0.0, 1.0, 0.0]), d(vec![0.0, 1.0, 0.0])),
        ],
    )
    .expect("valid constant")
}

/// Bounds for the three-letter example under both radicand conventions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2Report {
    pub lb_direct: f64,
    pub lb_side_info: f64,
    pub exact_pe: f64,
    /// Direct bound with `ρ` in place of `ρ²` under the radical.
    pub variant_direct: f64,
    /// Side-information bound with `ρ_s` in place of `ρ_s²`.
    pub variant_side_info: f64,
}

pub fn example2_report(pi: f64) -> Result<Example2Report> {
    let mix = example2_mixture();
    let (f, g) = mix.mixed();
    let rho = bhattacharyya(&f, &g)?;
    let variant = |rho: f64| -> Result<f64> { sqrt_one_minus(4.0 * pi * (1.0 - pi) * rho) };
    let mut variant_acc = 0.0;
    for (alpha, (fs, gs)) in mix.weights().iter().zip(mix.components()) {
        variant_acc += alpha * variant(bhattacharyya(fs, gs)?)?;
    }
    Ok(Example2Report {
        lb_direct: lb_direct(rho, pi)?,
        lb_side_info: lb_side_info(&mix, pi)?,
        exact_pe: exact_pe(&f, &g, pi)?,
        variant_direct: 0.5 * (1.0 - variant(rho)?),
        variant_side_info: 0.5 * (1.0 - variant_acc),
    })
}

/// One trial of the random two-component mixture comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureTrial {
    pub trial: usize,
    pub lb_direct: f64,
    pub lb_side_info: f64,
    pub exact_pe: f64,
}

/// Random mixtures at `π = ½`: `α₁ ~ U[0,1]`, components i.i.d. symmetric
/// Dirichlet of dimension `dim`. Each trial uses its own derived stream;
/// results come back sorted by `lb_direct`.
pub fn dirichlet_experiment(dim: usize, trials: usize, master_seed: u64) -> Result<Vec<MixtureTrial>> {
    if dim < 2 || trials == 0 {
        return Err(Error::InvalidArgument(format!(
            "need dim >= 2 and trials >= 1, got {dim} and {trials}"
        )));
    }
    let pi = 0.5;
    let mut out = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_rng(master_seed, "dirichlet-mixture", &[trial as u64]);
            let alpha: f64 = rng.random();
            let mut draw = || DiscreteDistribution::sample_dirichlet(dim, &mut rng);
            let (f1, f2, g1, g2) = (draw(), draw(), draw(), draw());
            let mix = MixturePair::new(vec![alpha, 1.0 - alpha], vec![(f1, g1), (f2, g2)])?;
            let (f, g) = mix.mixed();
            Ok(MixtureTrial {
                trial,
                lb_direct: lb_direct(bhattacharyya(&f, &g)?, pi)?,
                lb_side_info: lb_side_info(&mix, pi)?,
                exact_pe: exact_pe(&f, &g, pi)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.lb_direct.total_cmp(&b.lb_direct).then(a.trial.cmp(&b.trial)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn d(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bc_cases() {
        let f = d(&[1.0 / 3.0; 3]);
        assert_abs_diff_eq!(bhattacharyya(&f, &f).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(bhattacharyya(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 0.0);
        let g = d(&[0.5, 1.0 / 3.0, 1.0 / 6.0]);
        let expected = (1.0_f64 / 6.0).sqrt() + 1.0 / 3.0 + (1.0_f64 / 18.0).sqrt();
        assert_abs_diff_eq!(bhattacharyya(&f, &g).unwrap(), expected, epsilon = 1e-15);
        assert!(bhattacharyya(&f, &d(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn exact_pe_cases() {
        let f = d(&[0.2, 0.8]);
        assert_abs_diff_eq!(exact_pe(&f, &f, 0.3).unwrap(), 0.3, epsilon = 1e-15);
        assert_eq!(exact_pe(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), 0.5).unwrap(), 0.0);
        let (mf, mg) = example2_mixture().mixed();
        assert_abs_diff_eq!(exact_pe(&mf, &mg, 0.5).unwrap(), 5.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn scalar_bounds() {
        assert_eq!(lb_direct(0.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(lb_direct(1.0, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(lb_weak(1.0, 0.5), 0.25);
        assert_eq!(ub_pe(1.0, 0.5), 0.5);
        assert_eq!(lb_weak(0.0, 0.5), 0.0);
        assert_eq!(ub_pe(0.0, 0.5), 0.0);
        // overshoot within rounding is clamped, larger overshoot is rejected
        assert_abs_diff_eq!(lb_direct(1.0 + 1e-14, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert!(lb_direct(1.01, 0.5).is_err());
        assert!(lb_direct(0.5, 1.5).is_err());
    }

    #[test]
    fn side_info_cases() {
        let f = d(&[0.1, 0.6, 0.3]);
        let g = d(&[0.4, 0.4, 0.2]);
        let single = MixturePair::discrete(vec![1.0], vec![(f.clone(), g.clone())]).unwrap();
        assert_abs_diff_eq!(
            lb_side_info(&single, 0.3).unwrap(),
            lb_direct(bhattacharyya(&f, &g).unwrap(), 0.3).unwrap(),
            epsilon = 1e-15
        );
        let same = MixturePair::discrete(vec![0.4, 0.6], vec![(f.clone(), f.clone()), (g.clone(), g)]).unwrap();
        assert_abs_diff_eq!(lb_side_info(&same, 0.3).unwrap(), 0.3, epsilon = 1e-7);
        assert!(MixturePair::discrete(vec![0.5, 0.6], vec![(f.clone(), f.clone()), (f.clone(), f)]).is_err());
    }

    #[test]
    fn example2_values() {
        let r = example2_report(0.5).unwrap();
        assert_abs_diff_eq!(r.exact_pe, 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.lb_direct, 0.394033, epsilon = 1e-6);
        assert_abs_diff_eq!(r.lb_side_info, 0.413727, epsilon = 1e-6);
        assert_abs_diff_eq!(r.variant_direct, 0.4246, epsilon = 5e-5);
        assert_abs_diff_eq!(r.variant_side_info, 0.4385, epsilon = 5e-5);
        assert!(r.lb_direct < r.lb_side_info);
        assert!(r.variant_direct < r.variant_side_info);
    }

    #[test]
    fn example1_closed_form() {
        let p = |horizon| Example1Params {
            a: 1.0,
            noise_ratio: 0.0,
            horizon,
            beta: 0.5,
        };
        assert_abs_diff_eq!(example1_rho(&p(0)).unwrap(), (2.0_f64.sqrt() / 1.5).sqrt(), epsilon = 1e-15);
        let (_, gamma) = example1_factors(1.0, 0.0);
        assert_abs_diff_eq!(gamma, 0.8_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(example1_rho(&p(2)).unwrap(), 0.776786, epsilon = 1e-6);
        // a = 0 substituted analytically collapses both factors
        assert_eq!(example1_factors(0.0, 0.7), (1.0, 1.0));
        assert!(example1_rho(&Example1Params { a: 0.0, ..p(1) }).is_err());
    }

    #[test]
    fn dirichlet_trials_are_valid_and_sorted() {
        let out = dirichlet_experiment(10, 50, 3).unwrap();
        assert_eq!(out.len(), 50);
        for w in out.windows(2) {
            assert!(w[0].lb_direct <= w[1].lb_direct);
        }
        for t in &out {
            assert!(t.lb_direct <= t.exact_pe + 1e-12);
            assert!(t.lb_side_info <= t.exact_pe + 1e-12);
        }
        assert_eq!(out, dirichlet_experiment(10, 50, 3).unwrap());
        let one = dirichlet_experiment(4, 1, 9).unwrap();
        assert_eq!(one.len(), 1);
        assert!(dirichlet_experiment(1, 5, 0).is_err());
    }

    #[test]
    fn dirichlet_draws_are_distributions() {
        let mut rng = derive_rng(0, "t", &[]);
        for _ in 0..100 {
            let f = DiscreteDistribution::sample_dirichlet(7, &mut rng);
            assert!(DiscreteDistribution::new(f.probs().to_vec()).is_ok());
        }
    }
}
