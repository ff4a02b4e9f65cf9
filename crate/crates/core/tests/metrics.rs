use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::Rng;

use netinf_core::metrics::{
    auc_bound_numerical, auc_bound_shapiro, auc_bound_simple, default_auc_pi_grid, default_fpr_grid, error_ratios,
    mip, mip_curve, roc_sweep, trapezoid, Algorithm,
};
use netinf_core::recovery::LassoConfig;
use netinf_core::rng::derive_rng;
use netinf_core::{Matrix, ModelParams, SupportMatrix};

fn random_support(n: usize, p: f64, seed: u64, k: u64) -> SupportMatrix {
    let mut rng = derive_rng(seed, "support", &[k]);
    SupportMatrix::from_fn(n, |_, _| rng.random_bool(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn error_ratios_match_edge_counting(seed in 0u64..10_000, n in 2usize..8, batch in 1u64..6) {
        let truths: Vec<SupportMatrix> = (0..batch).map(|k| random_support(n, 0.4, seed, k)).collect();
        let estimates: Vec<SupportMatrix> = (0..batch).map(|k| random_support(n, 0.4, seed + 1, k)).collect();
        let (mut edges, mut missed, mut nonedges, mut false_pos) = (0, 0, 0, 0);
        for (t, e) in truths.iter().zip(&estimates) {
            for i in 0..n {
                for j in 0..n {
                    if t.get(i, j) {
                        edges += 1;
                        missed += usize::from(!e.get(i, j));
                    } else {
                        nonedges += 1;
                        false_pos += usize::from(e.get(i, j));
                    }
                }
            }
        }
        match error_ratios(&truths, &estimates) {
            Ok((miss, fp)) => {
                prop_assert_eq!(miss, missed as f64 / edges as f64);
                prop_assert_eq!(fp, false_pos as f64 / nonedges as f64);
            }
            Err(_) => prop_assert!(edges == 0 || nonedges == 0),
        }
    }

    #[test]
    fn mip_matches_explicit_inverse(seed in 0u64..10_000, n in 2usize..7) {
        let mut rng = derive_rng(seed, "mip-oracle", &[n as u64]);
        let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut q = b.t_matmul(&b).unwrap();
        q.add_diag(0.3);
        let q = q.symmetrized();
        let supports: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).filter(|_| rng.random_bool(0.4)).collect::<Vec<_>>())
            .collect();
        let mut expected: f64 = 0.0;
        for set in supports.iter().filter(|s| !s.is_empty() && s.len() < n) {
            let inv = invert(&q.select(set, set));
            for i in (0..n).filter(|i| !set.contains(i)) {
                let norm: f64 = (0..set.len())
                    .map(|c| (0..set.len()).map(|r| q[(i, set[r])] * inv[r][c]).sum::<f64>().abs())
                    .sum();
                expected = expected.max(norm);
            }
        }
        let got = mip(&q, &supports).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
    }
}

/// Gauss–Jordan inverse with partial pivoting.
fn invert(m: &Matrix) -> Vec<Vec<f64>> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        let pivot = a[k][k];
        for v in a[k].iter_mut() {
            *v /= pivot;
        }
        let row_k = a[k].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != k {
                let f = row[k];
                for (v, w) in row.iter_mut().zip(&row_k) {
                    *v -= f * w;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

#[test]
fn auc_bounds_are_ordered_and_monotone() {
    let fpr = default_fpr_grid();
    let pi = default_auc_pi_grid();
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for k in 1..20 {
        let rho = k as f64 * 0.05;
        let numerical = auc_bound_numerical(rho, &fpr, &pi).unwrap();
        let (simple, shapiro) = (auc_bound_simple(rho), auc_bound_shapiro(rho));
        assert!(numerical <= shapiro + 1e-9, "rho {rho}: {numerical} > {shapiro}");
        // the quartic bound is the tighter one until the curves cross near 0.65
        assert_eq!(simple <= shapiro, rho <= 0.65, "rho {rho}");
        assert!(numerical <= last.0 + 1e-12 && simple < last.1 && shapiro < last.2);
        last = (numerical, simple, shapiro);
    }
}

#[test]
fn auc_bound_limits() {
    let fpr = default_fpr_grid();
    let pi = default_auc_pi_grid();
    assert_relative_eq!(auc_bound_numerical(0.0, &fpr, &pi).unwrap(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(auc_bound_numerical(1.0, &fpr, &pi).unwrap(), 0.5, epsilon = 1e-3);
    assert_relative_eq!(auc_bound_shapiro(1.0), 0.5);
    assert_relative_eq!(trapezoid(&fpr, &fpr), 0.5, epsilon = 1e-15);
}

#[test]
fn mip_is_zero_for_independent_vertices() {
    let supports = vec![vec![0, 2], vec![], vec![1]];
    assert_eq!(mip(&Matrix::identity(3).scale(2.0), &supports).unwrap(), 0.0);
}

#[test]
fn mip_curve_starts_at_zero_and_is_reproducible() {
    let params = ModelParams {
        n: 30,
        horizon: 1,
        sigma2: 1.0,
        nu2: 0.0,
        p: 0.1,
        r0: 0.9,
    };
    let horizons = [1, 2, 5];
    let a = mip_curve(&params, &horizons, 4, 11).unwrap();
    assert_eq!(a, mip_curve(&params, &horizons, 4, 11).unwrap());
    assert_eq!(a[0].mean, 0.0);
    assert!(a[1].mean > 0.0 && a[2].mean > 0.0);
}

#[test]
fn lasso_sweep_traces_a_monotone_roc() {
    let params = ModelParams {
        n: 6,
        horizon: 30,
        sigma2: 1.0,
        nu2: 0.0,
        p: 0.3,
        r0: 0.8,
    };
    let grid: Vec<f64> = (0..10).map(|k| 0.005 * 1.8f64.powi(k)).collect();
    let sweep = roc_sweep(Algorithm::Lasso(LassoConfig::default()), &grid, &params, 20, 6).unwrap();
    for w in sweep.windows(2) {
        assert!(w[1].point.fpr <= w[0].point.fpr && w[1].point.tpr <= w[0].point.tpr);
    }
    assert!(sweep.iter().all(|s| s.fpr_stderr >= 0.0 && s.tpr_stderr >= 0.0));
}
