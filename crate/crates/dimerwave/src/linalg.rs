//! Thin wrappers over dense LAPACK routines plus a matrix-free GMRES.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, LeastSquaresSvd, Solve, SVD};

use crate::{C64, Error, Result};

/// Solve `a x = b` by LU factorization.
pub fn solve(a: &Array2<C64>, b: &Array1<C64>, context: &'static str) -> Result<Array1<C64>> {
    a.solve(b).map_err(|source| Error::LinearSolve { context, source })
}

/// `log det a` split as `(phase, ln |det|)`; `det = phase · exp(ln_abs)`.
pub fn log_det(a: &Array2<C64>, context: &'static str) -> Result<(C64, f64)> {
    a.sln_det().map_err(|source| Error::LinearSolve { context, source })
}

/// Minimum-norm least-squares solution of `a x = b` (SVD-based, handles
/// rank-deficient systems).
pub fn least_squares(
    a: &Array2<C64>,
    b: &Array1<C64>,
    context: &'static str,
) -> Result<Array1<C64>> {
    let out = a.least_squares(b).map_err(|source| Error::LinearSolve { context, source })?;
    Ok(out.solution)
}

/// Extreme singular values of `a` and the right singular vector of the
/// smallest one: `(σ_min, σ_max, v_min)` with `a v_min ≈ σ_min u`.
pub fn min_singular(a: &Array2<C64>, context: &'static str) -> Result<(f64, f64, Array1<C64>)> {
    let (_, s, vt) = a.svd(false, true).map_err(|source| Error::LinearSolve { context, source })?;
    let vt = vt.expect("requested right singular vectors");
    let last = s.len() - 1;
    // rows of vt are conj(v_i)^T for descending σ_i
    let v_min = vt.row(last).mapv(|z| z.conj());
    Ok((s[last], s[0], v_min))
}

/// Full-memory GMRES with modified Gram-Schmidt and Givens updates.
/// Starts from zero, stops at relative residual `tol` against `‖b‖`.
pub fn gmres<F>(mut apply: F, b: &Array1<C64>, tol: f64, max_iter: usize) -> Result<Array1<C64>>
where
    F: FnMut(&Array1<C64>) -> Array1<C64>,
{
    let n = b.len();
    let norm_b = l2(b);
    if norm_b == 0.0 {
        return Ok(Array1::zeros(n));
    }
    let m = max_iter.min(n);
    let mut basis: Vec<Array1<C64>> = vec![b / C64::new(norm_b, 0.0)];
    // Hessenberg columns after Givens, the rotations, and the rhs g
    let mut h_cols: Vec<Vec<C64>> = Vec::new();
    let mut givens: Vec<(C64, C64)> = Vec::new();
    let mut g = vec![C64::new(0.0, 0.0); m + 1];
    g[0] = C64::new(norm_b, 0.0);
    let mut residual = 1.0;
    let mut steps = 0;
    for j in 0..m {
        let mut w = apply(&basis[j]);
        let mut col = vec![C64::new(0.0, 0.0); j + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot_conj(v, &w);
            w.zip_mut_with(v, |wi, vi| *wi -= hij * vi);
            col[i] = hij;
        }
        let h_next = l2(&w);
        col[j + 1] = C64::new(h_next, 0.0);
        // previously computed rotations applied to the new column
        for (i, &(c, s)) in givens.iter().enumerate() {
            let (a0, a1) = (col[i], col[i + 1]);
            col[i] = c * a0 + s * a1;
            col[i + 1] = -s.conj() * a0 + c.conj() * a1;
        }
        // new rotation zeroing the subdiagonal entry
        let (a0, a1) = (col[j], col[j + 1]);
        let r = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        } else {
            (a0.conj() / r, a1.conj() / r)
        };
        col[j] = C64::new(r, 0.0);
        col[j + 1] = C64::new(0.0, 0.0);
        let g0 = g[j];
        g[j] = c * g0;
        g[j + 1] = -s.conj() * g0;
        givens.push((c, s));
        h_cols.push(col);
        steps = j + 1;
        residual = g[j + 1].norm() / norm_b;
        if residual <= tol || h_next < 1e-300 {
            break;
        }
        basis.push(&w / C64::new(h_next, 0.0));
    }
    if residual > tol {
        return Err(Error::IterativeSolve { iterations: steps, residual });
    }
    // back-substitute R y = g
    let k = steps;
    let mut y = vec![C64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (j2, yj) in y.iter().enumerate().take(k).skip(i + 1) {
            acc -= h_cols[j2][i] * yj;
        }
        y[i] = acc / h_cols[i][i];
    }
    let mut x = Array1::zeros(n);
    for (v, yi) in basis.iter().zip(&y) {
        x.zip_mut_with(v, |xi, vi| *xi += yi * vi);
    }
    Ok(x)
}

fn l2(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_conj(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            // diagonal dominance keeps the test system well conditioned
            a[(i, i)] += C64::new(2.0 * n as f64, 0.0);
        }
        a
    }

    #[test]
    fn solve_known_system() {
        let a = array![
            [C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(3.0, 0.0)]
        ];
        let x_true = array![C64::new(1.0, 1.0), C64::new(-2.0, 0.5)];
        let b = a.dot(&x_true);
        let x = solve(&a, &b, "test").unwrap();
        assert!((&x - &x_true).iter().map(|z| z.norm()).sum::<f64>() < 1e-12);
    }

    #[test]
    fn log_det_matches_direct_determinant() {
        let a = array![
            [C64::new(2.0, 1.0), C64::new(0.5, 0.0)],
            [C64::new(0.0, -1.0), C64::new(1.0, 3.0)]
        ];
        let direct = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let (phase, ln_abs) = log_det(&a, "test").unwrap();
        let recon = phase * ln_abs.exp();
        assert!((recon - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn least_squares_is_minimum_norm() {
        // rank-deficient: second column zero; minimum-norm solution has x[1] = 0
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let b = array![C64::new(2.0, 0.0), C64::new(3.0, 0.0)];
        let x = least_squares(&a, &b, "test").unwrap();
        assert!((x[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(x[1].norm() < 1e-12);
    }

    #[test]
    fn min_singular_of_diagonal() {
        let mut a = Array2::zeros((3, 3));
        a[(0, 0)] = C64::new(3.0, 0.0);
        a[(1, 1)] = C64::new(2.0, 0.0);
        a[(2, 2)] = C64::new(1e-8, 0.0);
        let (s_min, s_max, v) = min_singular(&a, "test").unwrap();
        assert!((s_min - 1e-8).abs() < 1e-20);
        assert!((s_max - 3.0).abs() < 1e-12);
        assert!((v[2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gmres_matches_direct_solve() {
        let n = 40;
        let a = random_matrix(n, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = Array1::from_iter(
            (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        );
        let x_direct = solve(&a, &b, "test").unwrap();
        let x_gmres = gmres(|v| a.dot(v), &b, 1e-12, 200).unwrap();
        let err: f64 = (&x_direct - &x_gmres).iter().map(|z| z.norm()).sum();
        assert!(err < 1e-9, "gmres deviates by {err}");
    }

    #[test]
    fn gmres_reports_stall() {
        let a = random_matrix(12, 3);
        let b = Array1::from_elem(12, C64::new(1.0, 0.0));
        let got = gmres(|v| a.dot(v), &b, 1e-30, 3);
        assert!(matches!(got, Err(Error::IterativeSolve { .. })));
    }
}
