mod common;

use ndarray::Array1;
use seqlasso::model::{fit_on_support, ActiveSet, Dataset};
use seqlasso::projection::ProjectionState;

#[test]
fn fit_matches_normal_equations_oracle() {
    let d = common::gaussian_dataset(10, 3, &[(0, 1.0), (2, -2.0)], 0.5, 101);
    let s = ActiveSet::from_indices([0, 1, 2]);
    let fit = fit_on_support(&d, &s).unwrap();
    let oracle = common::normal_equations_fit(&d, &[0, 1, 2]);
    for (k, j) in [0usize, 1, 2].into_iter().enumerate() {
        assert!((fit.get(j) - oracle[k]).abs() <= 1e-8, "beta_{j}");
    }
}

#[test]
fn fit_residual_is_orthogonal_to_the_support() {
    let d = common::gaussian_dataset(30, 8, &[(1, 2.0), (5, 1.0)], 1.0, 102);
    let s = ActiveSet::from_indices([1, 5, 7]);
    let fit = fit_on_support(&d, &s).unwrap();
    let resid = d.y() - &fit.predict_centered(&d);
    for j in s.iter() {
        assert!(d.column(j).dot(&resid).abs() <= 1e-8 * d.n as f64, "column {j}");
    }
}

#[test]
fn single_orthogonal_feature_gets_marginal_coefficient() {
    let x = common::orthogonal_columns(20, 4, 103);
    let y = x.column(2).to_owned() * 1.7 + x.column(0).to_owned() * 0.4;
    let d = Dataset::from_standardized(x, y).unwrap();
    let s = ActiveSet::from_indices([2]);
    let fit = fit_on_support(&d, &s).unwrap();
    let want = d.column(2).dot(d.y()) / d.n as f64;
    assert!((fit.get(2) - want).abs() < 1e-12);
}

#[test]
fn fit_rss_agrees_with_the_incremental_projector() {
    let d = common::gaussian_dataset(25, 10, &[(0, 1.0), (4, -1.5), (9, 0.5)], 1.0, 104);
    let cols = [4usize, 9, 0, 6];
    let s = ActiveSet::from_indices(cols);
    let fit = fit_on_support(&d, &s).unwrap();
    let resid = d.y() - &fit.predict_centered(&d);
    let fit_rss = resid.dot(&resid);

    let mut st = ProjectionState::new(&d);
    for j in cols {
        st.add_feature(&d, j).unwrap();
    }
    assert!((fit_rss - st.rss()).abs() <= 1e-8 * st.rss().max(1.0));
}

#[test]
fn empty_support_residual_is_the_centered_response() {
    let d = common::gaussian_dataset(15, 3, &[(0, 1.0)], 1.0, 105);
    let fit = fit_on_support(&d, &ActiveSet::new()).unwrap();
    let pred = fit.predict_centered(&d);
    assert!(pred.iter().all(|v| *v == 0.0));
    let resid: Array1<f64> = d.y() - &pred;
    assert!((resid.dot(&resid) - d.y().dot(d.y())).abs() < 1e-12);
}
