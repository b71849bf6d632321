//! Shared test oracles, all independent of the library's solve paths:
//! explicit Gauss-Jordan inversion, a dense projector, and a coordinate
//! descent lasso.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use seqlasso::model::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.sample(StandardNormal))
}

pub fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.sample(StandardNormal))
}

/// A standardized dataset with Gaussian design and y = X beta + sigma eps.
pub fn gaussian_dataset(
    n: usize,
    p: usize,
    beta: &[(usize, f64)],
    sigma: f64,
    seed: u64,
) -> Dataset {
    let mut r = rng(seed);
    let x = gaussian_matrix(n, p, &mut r);
    let mut y = gaussian_vector(n, &mut r) * sigma;
    for &(j, b) in beta {
        y.scaled_add(b, &x.column(j));
    }
    Dataset::standardize(x, y).unwrap()
}

/// Columns orthogonal to each other and to the constant vector, scaled to
/// squared norm n. Requires p <= n - 1.
pub fn orthogonal_columns(n: usize, p: usize, seed: u64) -> Array2<f64> {
    assert!(p < n);
    let mut r = rng(seed);
    let nf = n as f64;
    let mut basis: Vec<Array1<f64>> = vec![Array1::from_elem(n, 1.0 / nf.sqrt())];
    while basis.len() < p + 1 {
        let mut v = gaussian_vector(n, &mut r);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.scaled_add(-c, b);
            }
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    let mut x = Array2::<f64>::zeros((n, p));
    for j in 0..p {
        x.column_mut(j).assign(&(&basis[j + 1] * nf.sqrt()));
    }
    x
}

/// Gauss-Jordan inversion with partial pivoting; panics on singularity.
pub fn invert(a: &Array2<f64>) -> Array2<f64> {
    let k = a.nrows();
    assert_eq!(k, a.ncols());
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(k);
    for col in 0..k {
        let mut piv = col;
        for row in col + 1..k {
            if m[[row, col]].abs() > m[[piv, col]].abs() {
                piv = row;
            }
        }
        assert!(m[[piv, col]].abs() > 1e-12, "singular matrix in oracle");
        if piv != col {
            for j in 0..k {
                m.swap([piv, j], [col, j]);
                inv.swap([piv, j], [col, j]);
            }
        }
        let d = m[[col, col]];
        for j in 0..k {
            m[[col, j]] /= d;
            inv[[col, j]] /= d;
        }
        for row in 0..k {
            if row != col {
                let f = m[[row, col]];
                if f != 0.0 {
                    for j in 0..k {
                        let mc = m[[col, j]];
                        let ic = inv[[col, j]];
                        m[[row, j]] -= f * mc;
                        inv[[row, j]] -= f * ic;
                    }
                }
            }
        }
    }
    inv
}

/// Dense projector H = X (X^T X)^{-1} X^T over the given columns.
pub fn dense_projector(d: &Dataset, cols: &[usize]) -> Array2<f64> {
    let n = d.n;
    let k = cols.len();
    let mut xs = Array2::<f64>::zeros((n, k));
    for (a, &j) in cols.iter().enumerate() {
        xs.column_mut(a).assign(&d.column(j));
    }
    let gram = xs.t().dot(&xs);
    let gi = invert(&gram);
    xs.dot(&gi).dot(&xs.t())
}

/// Least squares via explicit normal equations.
pub fn normal_equations_fit(d: &Dataset, cols: &[usize]) -> Array1<f64> {
    let k = cols.len();
    let mut xs = Array2::<f64>::zeros((d.n, k));
    for (a, &j) in cols.iter().enumerate() {
        xs.column_mut(a).assign(&d.column(j));
    }
    let gram = xs.t().dot(&xs);
    invert(&gram).dot(&xs.t().dot(d.y()))
}

/// RSS of the least-squares fit on the given columns.
pub fn rss_of(d: &Dataset, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return d.y().dot(d.y());
    }
    let h = dense_projector(d, cols);
    let fitted = h.dot(d.y());
    let r = d.y() - &fitted;
    r.dot(&r)
}

/// Coordinate-descent solver for ||y - X b||^2 + lambda ||b||_1, run to a
/// max-coordinate-change tolerance. Independent of the LARS path code.
pub fn cd_lasso(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Array1<f64> {
    let p = x.ncols();
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    let mut beta = Array1::<f64>::zeros(p);
    let mut resid = y.clone();
    for _ in 0..max_sweeps {
        let mut max_change = 0.0_f64;
        for j in 0..p {
            if norms[j] <= 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = x.column(j).dot(&resid) + norms[j] * old;
            let thresh = lambda / 2.0;
            let new = if rho.abs() <= thresh {
                0.0
            } else {
                (rho - thresh * rho.signum()) / norms[j]
            };
            if new != old {
                resid.scaled_add(old - new, &x.column(j));
                beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change < tol {
            break;
        }
    }
    beta
}
