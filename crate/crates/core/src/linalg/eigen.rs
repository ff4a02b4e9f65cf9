use nalgebra::{DMatrix, Schur};

use super::Matrix;
use crate::error::{Error, Result};

const SCHUR_MAX_ITERS: usize = 100_000;
/// Prime modulus for the exact nilpotency check on integer matrices.
const NILPOTENT_PRIME: u64 = 2_147_483_647;
const MAX_EXACT_INTEGER: f64 = 1_048_576.0;

/// Largest eigenvalue modulus of a square matrix.
///
/// Integer-valued inputs (signed adjacency patterns) are first checked for
/// nilpotency in modular arithmetic, so a nilpotent pattern reports exactly
/// zero instead of the `O(eps^(1/k))` dust a Schur decomposition leaves on
/// a defective zero eigenvalue.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "spectral radius of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    if is_integer_valued(a) && is_nilpotent_integer(a) {
        return Ok(0.0);
    }
    let n = a.rows();
    let m = DMatrix::from_row_slice(n, n, a.as_slice());
    // The unshifted-restart QR iteration can cycle on small integer
    // patterns; the transpose and a reversal similarity share the spectrum
    // and usually break the cycle.
    let reversed = DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
    let candidates = [m.clone(), m.transpose(), reversed.clone(), reversed.transpose()];
    for candidate in candidates {
        if let Some(schur) = Schur::try_new(candidate, f64::EPSILON, SCHUR_MAX_ITERS) {
            return Ok(schur
                .complex_eigenvalues()
                .iter()
                .fold(0.0_f64, |r, z| r.max(z.norm())));
        }
    }
    Err(Error::NoConvergence(format!("Schur decomposition of order {n}")))
}

fn is_integer_valued(a: &Matrix) -> bool {
    a.as_slice()
        .iter()
        .all(|v| v.fract() == 0.0 && v.abs() <= MAX_EXACT_INTEGER)
}

/// Tests `A^n = 0` by pushing two fixed pseudo-random row vectors through
/// `n` multiplications modulo a prime. A non-nilpotent integer matrix
/// survives this check with probability at most `2n / p` per vector.
fn is_nilpotent_integer(a: &Matrix) -> bool {
    let n = a.rows();
    let p = NILPOTENT_PRIME;
    let residues: Vec<u64> = a
        .as_slice()
        .iter()
        .map(|&v| (v as i64).rem_euclid(p as i64) as u64)
        .collect();
    let mut state = 0x5eed_u64;
    for _ in 0..2 {
        let mut v: Vec<u64> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
                (state >> 33) % p
            })
            .collect();
        for _ in 0..n {
            let mut next = vec![0u64; n];
            for (k, &vk) in v.iter().enumerate() {
                if vk == 0 {
                    continue;
                }
                for (o, &r) in next.iter_mut().zip(&residues[k * n..(k + 1) * n]) {
                    *o = (*o + vk * r) % p;
                }
            }
            v = next;
            if v.iter().all(|&x| x == 0) {
                break;
            }
        }
        if v.iter().any(|&x| x != 0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_that_stalls_plain_schur() {
        let v = [
            0., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., -1., 0., 0., 0., 0., 0., 0., 0., 0., 0.,
            0., 0., 0., 0., 0., 0., 0., 0., 0., 0., -1., 0., 1., 1., 0., 0., 0., 1., 0., 0., 0., 0., 0., -1., 0.,
            0., 0., 0., 0., 1., 0., 0., 0., 0., 0., -1., 1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 1., -1., -1.,
            0., 0., 0., 0., 0., -1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.,
        ];
        let a = Matrix::new(10, 10, v.to_vec()).unwrap();
        let r = spectral_radius(&a).unwrap();
        assert!((r - 1.3562030656262956).abs() < 1e-12, "{r}");
    }
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_unit_radius() {
        assert_abs_diff_eq!(spectral_radius(&Matrix::identity(3)).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn nilpotent_is_exactly_zero() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(spectral_radius(&a).unwrap(), 0.0);
        // nilpotent with a cycle through signs: [[1,1],[-1,-1]]^2 = 0
        let b = Matrix::from_rows(&[&[1.0, 1.0], &[-1.0, -1.0]]);
        assert_eq!(spectral_radius(&b).unwrap(), 0.0);
        // permuted strictly-triangular pattern of order 6
        let c = Matrix::from_fn(6, 6, |i, j| if (j + 2) % 6 > (i + 2) % 6 { -1.0 } else { 0.0 });
        assert_eq!(spectral_radius(&c).unwrap(), 0.0);
    }

    #[test]
    fn swap_pair_has_unit_radius() {
        // λ² − 1 = 0
        let a = Matrix::from_rows(&[&[0.0, 2.0], &[0.5, 0.0]]);
        assert_abs_diff_eq!(spectral_radius(&a).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn rotation_has_complex_pair() {
        // eigenvalues 0.6 ± 0.8i
        let a = Matrix::from_rows(&[&[0.6, -0.8], &[0.8, 0.6]]);
        assert_abs_diff_eq!(spectral_radius(&a).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            spectral_radius(&Matrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }
}
