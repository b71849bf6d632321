//! Small dense solves shared by the fitting and condition-checking code.
//!
//! Everything here operates on symmetric positive definite systems of the
//! size of an active set (tens of columns), so a plain Cholesky with a
//! relative pivot floor is all that is needed.

use ndarray::{Array1, Array2};

/// Lower Cholesky factor of a symmetric matrix, or `None` when a pivot
/// falls below `rel_tol` times the largest diagonal entry (treated as
/// numerical rank deficiency).
pub(crate) fn cholesky(a: &Array2<f64>, rel_tol: f64) -> Option<Array2<f64>> {
    let k = a.nrows();
    debug_assert_eq!(k, a.ncols());
    let max_diag = (0..k).map(|i| a[[i, i]]).fold(0.0_f64, f64::max);
    let floor = rel_tol * max_diag.max(f64::MIN_POSITIVE);
    let mut l = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for m in 0..j {
                s -= l[[i, m]] * l[[j, m]];
            }
            if i == j {
                if s <= floor || !s.is_finite() {
                    return None;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solve `L z = b` for lower-triangular `L`.
pub(crate) fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let k = b.len();
    let mut z = Array1::<f64>::zeros(k);
    for i in 0..k {
        let mut s = b[i];
        for j in 0..i {
            s -= l[[i, j]] * z[j];
        }
        z[i] = s / l[[i, i]];
    }
    z
}

/// Solve `L^T x = z` for lower-triangular `L`.
pub(crate) fn solve_lower_transpose(l: &Array2<f64>, z: &Array1<f64>) -> Array1<f64> {
    let k = z.len();
    let mut x = Array1::<f64>::zeros(k);
    for i in (0..k).rev() {
        let mut s = z[i];
        for j in i + 1..k {
            s -= l[[j, i]] * x[j];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solve `A x = b` for symmetric positive definite `A`.
/// Returns `None` on numerical rank deficiency.
pub(crate) fn solve_spd(a: &Array2<f64>, b: &Array1<f64>, rel_tol: f64) -> Option<Array1<f64>> {
    let l = cholesky(a, rel_tol)?;
    Some(solve_lower_transpose(&l, &solve_lower(&l, b)))
}

/// Solve with an already-computed factor.
pub(crate) fn solve_with_factor(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}
