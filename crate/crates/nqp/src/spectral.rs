//! Power-iteration eigenvalue estimates for dense matrices in row-major storage.
//!
//! These are estimates, not certified bounds; the exact bound used by the
//! problem embedding lives in [`crate::reduction::gershgorin_bound`].

/// `out = a * x` for a dense row-major `n x n` matrix.
pub fn mat_vec(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(out.len(), n);
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(&aij, &xj)| aij * xj).sum();
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Deterministic start vector: a fixed xorshift stream so repeated runs agree
/// and the start is not orthogonal to any particular eigenvector in practice.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let nrm = norm(&v);
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    } else {
        v[0] = 1.0;
    }
    v
}

fn max_abs_row_sum(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue of a symmetric matrix by shifted power iteration.
///
/// Shifting by the max absolute row sum makes the target eigenvalue the one
/// of largest magnitude, so the Rayleigh quotient converges to `lambda_max`
/// itself rather than to whichever end of the spectrum dominates in modulus.
/// Iterates until the quotient changes by less than `tol` relative.
pub fn symmetric_lambda_max(a: &[f64], n: usize, tol: f64) -> f64 {
    assert_eq!(a.len(), n * n, "matrix/dimension mismatch");
    if n == 0 {
        return 0.0;
    }
    let shift = max_abs_row_sum(a, n);
    if shift == 0.0 {
        return 0.0;
    }
    let mut shifted = a.to_vec();
    for i in 0..n {
        shifted[i * n + i] += shift;
    }

    let mut v = start_vector(n);
    let mut av = vec![0.0; n];
    let mut rayleigh = 0.0f64;
    for _ in 0..100_000 {
        mat_vec(&shifted, n, &v, &mut av);
        let next = v.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>();
        let nrm = norm(&av);
        if nrm == 0.0 {
            // v is in the kernel of the shifted matrix; lambda_max = -shift
            return -shift;
        }
        av.iter().zip(v.iter_mut()).for_each(|(&x, y)| *y = x / nrm);
        if (next - rayleigh).abs() <= tol * next.abs().max(1e-300) {
            rayleigh = next;
            break;
        }
        rayleigh = next;
    }
    rayleigh - shift
}

/// Smallest eigenvalue of a symmetric matrix: `lambda_min(A) = -lambda_max(-A)`.
pub fn symmetric_lambda_min(a: &[f64], n: usize, tol: f64) -> f64 {
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    -symmetric_lambda_max(&neg, n, tol)
}

/// Spectral radius of a general square matrix by power iteration with a
/// two-term recurrence fit.
///
/// A plain power iteration oscillates when the dominant eigenvalues are a
/// complex conjugate pair, which is the generic case for random recurrent
/// weight matrices. Fitting `A^2 q ~ a Aq + b q` instead recovers the
/// dominant pair as roots of `mu^2 - a mu - b`, whose largest modulus is the
/// spectral radius in both the real and the complex case.
///
/// Returns `None` when the estimate has not stabilised to `tol` relative
/// within `max_iters` iterations (clustered moduli, defective matrices).
pub fn spectral_radius(a: &[f64], n: usize, tol: f64, max_iters: usize) -> Option<f64> {
    assert_eq!(a.len(), n * n, "matrix/dimension mismatch");
    if n == 0 {
        return Some(0.0);
    }
    let mut q = start_vector(n);
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    let mut estimate = f64::NAN;
    let mut stable = 0;
    for _ in 0..max_iters {
        mat_vec(a, n, &q, &mut r1);
        let n1 = norm(&r1);
        if n1 == 0.0 {
            return Some(0.0);
        }
        mat_vec(a, n, &r1, &mut r2);

        // least squares for r2 = a*r1 + b*q; q has unit norm
        let g11 = n1 * n1;
        let g12: f64 = r1.iter().zip(&q).map(|(x, y)| x * y).sum();
        let h1: f64 = r1.iter().zip(&r2).map(|(x, y)| x * y).sum();
        let h2: f64 = q.iter().zip(&r2).map(|(x, y)| x * y).sum();
        let det = g11 - g12 * g12;
        let rho = if det.abs() <= 1e-14 * g11 {
            // q is already an eigenvector direction
            n1
        } else {
            let ca = (h1 - g12 * h2) / det;
            let cb = (g11 * h2 - g12 * h1) / det;
            let disc = ca * ca + 4.0 * cb;
            if disc >= 0.0 {
                let root = disc.sqrt();
                ((ca + root) / 2.0).abs().max(((ca - root) / 2.0).abs())
            } else {
                (-cb).sqrt()
            }
        };

        let n2 = norm(&r2);
        if n2 == 0.0 {
            return Some(0.0);
        }
        r2.iter().zip(q.iter_mut()).for_each(|(&x, y)| *y = x / n2);

        if (rho - estimate).abs() <= tol * rho.abs().max(1e-300) {
            stable += 1;
            if stable >= 3 {
                return Some(rho);
            }
        } else {
            stable = 0;
        }
        estimate = rho;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_max_of_diagonal() {
        // diag(2, -7): lambda_max = 2 even though |-7| dominates
        let a = vec![2.0, 0.0, 0.0, -7.0];
        let lam = symmetric_lambda_max(&a, 2, 1e-12);
        assert!((lam - 2.0).abs() < 1e-9, "got {lam}");
        let lo = symmetric_lambda_min(&a, 2, 1e-12);
        assert!((lo + 7.0).abs() < 1e-9, "got {lo}");
    }

    #[test]
    fn lambda_max_of_2x2() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let a = vec![2.0, 1.0, 1.0, 2.0];
        let lam = symmetric_lambda_max(&a, 2, 1e-12);
        assert!((lam - 3.0).abs() < 1e-9, "got {lam}");
    }

    #[test]
    fn radius_of_rotation_scaling() {
        // 2x smaller rotation: eigenvalues 0.5*(cos t ± i sin t), radius 0.5
        let t = 0.7f64;
        let a = vec![0.5 * t.cos(), -0.5 * t.sin(), 0.5 * t.sin(), 0.5 * t.cos()];
        let rho = spectral_radius(&a, 2, 1e-12, 10_000).expect("converges");
        assert!((rho - 0.5).abs() < 1e-9, "got {rho}");
    }

    #[test]
    fn radius_of_zero_matrix() {
        let a = vec![0.0; 9];
        assert_eq!(spectral_radius(&a, 3, 1e-12, 100), Some(0.0));
        assert_eq!(symmetric_lambda_max(&a, 3, 1e-12), 0.0);
    }

    #[test]
    fn radius_matches_dense_eigensolver_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = rng.gen_range(2..=12);
            let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = nalgebra::DMatrix::from_row_slice(n, n, &a);
            let exact = m
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if let Some(rho) = spectral_radius(&a, n, 1e-12, 20_000) {
                assert!(
                    (rho - exact).abs() <= 1e-6 * exact.max(1.0),
                    "trial {trial}: power {rho} vs dense {exact}"
                );
            }
        }
    }
}
