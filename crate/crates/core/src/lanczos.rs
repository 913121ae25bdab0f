//! Lanczos iteration for the lowest eigenpairs of a real symmetric operator,
//! with full reorthogonalization.
//!
//! The operator is supplied as a matvec closure; the matrix is never stored.
//! Convergence is tracked through the residual bound `beta_m * |s_m|` where
//! `s_m` is the last component of the tridiagonal ground eigenvector. The
//! two lowest eigenvalues of the tridiagonal matrix are located by Sturm
//! bisection each iteration (cheap), and eigenvectors are recovered once at
//! the end from a dense solve of the tridiagonal problem.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Hard cap on Krylov dimension.
    pub max_iter: usize,
    /// Target residual for the ground eigenpair, `||Hv - Ev||_2`.
    pub tol: f64,
    /// Seed for the starting vector when none is supplied.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_iter: 500,
            tol: 1e-12,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Lowest eigenvalue.
    pub energy: f64,
    /// Second-lowest eigenvalue found in the Krylov space (diagnostic; equals
    /// `energy` when the Krylov space is one-dimensional).
    pub energy_1: f64,
    /// Ground eigenvector, unit norm.
    pub ground: Vec<f64>,
    /// First-excited Ritz vector, unit norm (empty when Krylov dim is 1).
    pub excited: Vec<f64>,
    /// Number of matvec applications used.
    pub iterations: usize,
    /// Residual bound for the ground pair at exit.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(a: &mut [f64], s: f64) {
    for x in a.iter_mut() {
        *x *= s;
    }
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`
/// (Sturm sequence count).
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if q != 0.0 { b2 / q } else { b2 / 1e-300 };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (0-based) of the tridiagonal matrix by bisection.
fn tridiag_eigenvalue(alpha: &[f64], beta: &[f64], k: usize) -> f64 {
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..alpha.len() {
        let r = if i == 0 { 0.0 } else { beta[i - 1].abs() }
            + if i < beta.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    if !(lo < hi) {
        return alpha[0];
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(alpha, beta, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * (hi.abs().max(lo.abs()) + 1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Dense eigendecomposition of the tridiagonal matrix; returns eigenvalues
/// ascending and eigenvectors as columns.
fn tridiag_eigh(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let m = alpha.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alpha[i];
        if i > 0 {
            t[[i, i - 1]] = beta[i - 1];
            t[[i - 1, i]] = beta[i - 1];
        }
    }
    let (vals, vecs) = t.eigh(UPLO::Lower)?;
    Ok((vals.to_vec(), vecs))
}

/// Deterministic random start vector.
pub(crate) fn seeded_unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

/// Finds the lowest eigenpair (and the first-excited Ritz pair) of a real
/// symmetric operator given by `matvec`.
///
/// `init` seeds the Krylov space when provided, otherwise a seeded random
/// vector is used. Errors with [`Error::Convergence`] if the residual bound
/// has not reached `opts.tol` within `opts.max_iter` matvecs.
pub fn lowest_eigenpair<F>(
    dim: usize,
    matvec: F,
    init: Option<&[f64]>,
    opts: &LanczosOptions,
) -> Result<LanczosResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::Domain("cannot diagonalize a 0-dim operator".into()));
    }
    let max_iter = opts.max_iter.min(dim);
    let mut q = match init {
        Some(v) => {
            let mut q = v.to_vec();
            let n = norm(&q);
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::Domain("initial vector has invalid norm".into()));
            }
            scale(&mut q, 1.0 / n);
            q
        }
        None => seeded_unit_vector(dim, opts.seed),
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_iter);
    let mut beta: Vec<f64> = Vec::with_capacity(max_iter);
    let mut w = vec![0.0f64; dim];
    let mut residual_bound = f64::INFINITY;
    let mut exhausted = false;

    basis.push(q.clone());
    for j in 0..max_iter {
        matvec(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        if !a.is_finite() {
            return Err(Error::Convergence {
                iterations: j + 1,
                residual: f64::NAN,
                tol: opts.tol,
            });
        }
        alpha.push(a);
        axpy(&mut w, -a, &basis[j]);
        if j > 0 {
            let b = beta[j - 1];
            axpy(&mut w, -b, &basis[j - 1]);
        }
        // Full reorthogonalization against the whole basis.
        for qi in &basis {
            let ov = dot(qi, &w);
            axpy(&mut w, -ov, qi);
        }
        let b = norm(&w);

        // Residual bound beta * |last component of tridiagonal ground vector|
        if !alpha.is_empty() {
            let theta = tridiag_eigenvalue(&alpha, &beta, 0);
            let s_last = tridiag_ground_last_component(&alpha, &beta, theta);
            residual_bound = b * s_last.abs();
            if residual_bound <= opts.tol || b <= 1e-14 * a.abs().max(1.0) {
                if b <= 1e-14 * a.abs().max(1.0) {
                    exhausted = true;
                }
                break;
            }
        }
        if j + 1 == max_iter {
            break;
        }
        beta.push(b);
        q.copy_from_slice(&w);
        scale(&mut q, 1.0 / b);
        basis.push(q.clone());
    }

    let m = alpha.len();
    let (vals, vecs) = tridiag_eigh(&alpha, &beta[..m - 1])?;

    let build_ritz = |col: usize| -> Vec<f64> {
        let mut v = vec![0.0f64; dim];
        for (i, qi) in basis.iter().enumerate().take(m) {
            axpy(&mut v, vecs[[i, col]], qi);
        }
        let n = norm(&v);
        if n > 0.0 {
            scale(&mut v, 1.0 / n);
        }
        v
    };

    let ground = build_ritz(0);
    let (energy_1, excited) = if m > 1 {
        (vals[1], build_ritz(1))
    } else {
        (vals[0], Vec::new())
    };

    // True residual of the returned pair.
    matvec(&ground, &mut w);
    axpy(&mut w, -vals[0], &ground);
    let residual = norm(&w);

    if residual > opts.tol && !exhausted && m >= max_iter {
        return Err(Error::Convergence {
            iterations: m,
            residual,
            tol: opts.tol,
        });
    }

    Ok(LanczosResult {
        energy: vals[0],
        energy_1,
        ground,
        excited,
        iterations: m,
        residual: residual.min(residual_bound),
    })
}

/// Last component of the (normalized) tridiagonal eigenvector for eigenvalue
/// `theta`, by inverse iteration with a tridiagonal LU solve.
fn tridiag_ground_last_component(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let m = alpha.len();
    if m == 1 {
        return 1.0;
    }
    // Slightly shifted to keep the solve well-posed at an exact eigenvalue.
    let shift = theta - 1e-12 * (theta.abs() + 1.0);
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..2 {
        if !solve_tridiag_shifted(alpha, beta, shift, &mut x) {
            return 1.0; // fall back to the conservative bound
        }
        let n = norm(&x);
        if !(n > 0.0) || !n.is_finite() {
            return 1.0;
        }
        scale(&mut x, 1.0 / n);
    }
    x[m - 1]
}

/// Solves `(T - shift I) y = x` in place (Thomas elimination, guarded pivots).
/// Accuracy only influences the stopping heuristic; the true residual is
/// re-checked with an explicit matvec before returning.
fn solve_tridiag_shifted(alpha: &[f64], beta: &[f64], shift: f64, x: &mut [f64]) -> bool {
    let m = alpha.len();
    let guard = |v: f64| if v.abs() < 1e-300 { 1e-300f64.copysign(v) } else { v };
    let mut d: Vec<f64> = alpha.iter().map(|a| a - shift).collect();
    for i in 1..m {
        let w = beta[i - 1] / guard(d[i - 1]);
        d[i] -= w * beta[i - 1];
        x[i] -= w * x[i - 1];
    }
    x[m - 1] /= guard(d[m - 1]);
    for i in (0..m - 1).rev() {
        x[i] = (x[i] - beta[i] * x[i + 1]) / guard(d[i]);
    }
    x.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_matvec(mat: &Array2<f64>) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |v, out| {
            for (i, row) in mat.rows().into_iter().enumerate() {
                out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
            }
        }
    }

    #[test]
    fn diagonal_matrix_ground_pair() {
        let mat = Array2::from_diag(&ndarray::arr1(&[3.0, -1.0, 2.0, 5.0]));
        let res = lowest_eigenpair(4, dense_matvec(&mat), None, &LanczosOptions::default())
            .unwrap();
        assert!((res.energy - (-1.0)).abs() < 1e-12);
        assert!((res.ground[1].abs() - 1.0).abs() < 1e-10);
        assert!((res.energy_1 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn symmetric_random_matches_eigh() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mat = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
        mat = (&mat + &mat.t()) * 0.5;
        let (vals, _) = mat.eigh(UPLO::Lower).unwrap();
        let res = lowest_eigenpair(n, dense_matvec(&mat), None, &LanczosOptions::default())
            .unwrap();
        assert!(
            (res.energy - vals[0]).abs() < 1e-10,
            "lanczos {} vs eigh {}",
            res.energy,
            vals[0]
        );
        assert!(res.residual < 1e-10);
        // ground/excited orthogonality
        if !res.excited.is_empty() {
            let ov: f64 = res.ground.iter().zip(&res.excited).map(|(a, b)| a * b).sum();
            assert!(ov.abs() < 1e-8);
        }
    }

    #[test]
    fn init_vector_already_eigenvector() {
        let mat = Array2::from_diag(&ndarray::arr1(&[1.0, -2.0, 0.5]));
        let init = [0.0, 1.0, 0.0];
        let res = lowest_eigenpair(
            3,
            dense_matvec(&mat),
            Some(&init),
            &LanczosOptions::default(),
        )
        .unwrap();
        assert!((res.energy - (-2.0)).abs() < 1e-13);
    }

    #[test]
    fn dim_one_operator() {
        let res = lowest_eigenpair(
            1,
            |v, out| {
                out[0] = 4.0 * v[0];
            },
            None,
            &LanczosOptions::default(),
        )
        .unwrap();
        assert_eq!(res.energy, 4.0);
        assert_eq!(res.ground.len(), 1);
    }
}
