mod common;

use ndarray::Array1;
use seqlasso::criteria::{ebic, ebic_value, select_by_ebic, CriterionConfig, EbicError};
use seqlasso::model::{ActiveSet, Dataset, Termination};
use seqlasso::selectors::{slasso_run, SelectorConfig};

#[test]
fn null_model_value_is_log_mean_square() {
    let d = common::gaussian_dataset(40, 6, &[(0, 1.0)], 1.0, 41);
    let v = ebic(&d, &ActiveSet::new(), &CriterionConfig::Gamma(0.7)).unwrap();
    let nf = d.n as f64;
    let want = nf * (d.y().dot(d.y()) / nf).ln();
    assert!((v - want).abs() < 1e-10);
}

#[test]
fn hand_computed_value_at_known_dimensions() {
    // n = 100, p = 268, |s| = 2, rss/n = 1, gamma from the r = 1.5 rule;
    // expected value evaluated with an independent log-gamma oracle
    let gamma = CriterionConfig::GammaRule { r: 1.5 }.gamma(100, 268);
    let v = ebic_value(100, 268, 2, 100.0, gamma);
    assert!((v - 24.422962980389237).abs() < 1e-9, "got {v}");
}

#[test]
fn gamma_zero_matches_bic_on_data() {
    let d = common::gaussian_dataset(30, 5, &[(1, 2.0)], 0.5, 42);
    let s = ActiveSet::from_indices([1]);
    let v = ebic(&d, &s, &CriterionConfig::Gamma(0.0)).unwrap();
    let rss = common::rss_of(&d, &[1]);
    let nf = d.n as f64;
    assert!((v - (nf * (rss / nf).ln() + nf.ln())).abs() < 1e-8);
}

#[test]
fn strong_signal_minimum_lands_on_the_true_size() {
    // |s0| = 3 with clear separation; verified against an exhaustive scan
    // of the nested models through the public ebic()
    let n = 60;
    let x = common::orthogonal_columns(n, 10, 43);
    let mut y = Array1::<f64>::zeros(n);
    for (j, b) in [(0usize, 6.0), (1usize, 5.0), (2usize, 4.0)] {
        y.scaled_add(b, &x.column(j));
    }
    let noise = common::gaussian_vector(n, &mut common::rng(44));
    y.scaled_add(0.5, &noise);
    let d = Dataset::standardize(x, y).unwrap();
    let cfg = CriterionConfig::default();
    let path = slasso_run(&d, &SelectorConfig::for_dataset(&d).with_max_steps(10));
    let sel = select_by_ebic(&path, &d, &cfg);
    assert_eq!(sel.argmin_step, 3);
    assert_eq!(sel.selected.len(), 3);
    assert!(!sel.budget_suspect);
    assert!(!sel.perfect_fit);

    // exhaustive scan over the path's candidate sets agrees
    let mut best = (0usize, seqlasso::criteria::null_ebic(d.y()));
    for (k, step) in path.steps.iter().enumerate() {
        let v = ebic(&d, &step.active, &cfg).unwrap();
        assert!((v - sel.values[k + 1]).abs() < 1e-8);
        if v < best.1 {
            best = (k + 1, v);
        }
    }
    assert_eq!(best.0, sel.argmin_step);
}

#[test]
fn perfect_fit_is_flagged_and_selected() {
    let n = 30;
    let x = common::orthogonal_columns(n, 6, 45);
    let mut y = Array1::<f64>::zeros(n);
    y.scaled_add(3.0, &x.column(2));
    y.scaled_add(-2.0, &x.column(4));
    let d = Dataset::from_standardized(x, y).unwrap();
    let path = slasso_run(&d, &SelectorConfig::for_dataset(&d).with_max_steps(6));
    let sel = select_by_ebic(&path, &d, &CriterionConfig::default());
    assert!(sel.perfect_fit);
    assert_eq!(sel.selected.len(), 2);
    assert!(sel.values.last().unwrap().is_infinite());
}

#[test]
fn single_step_path_chooses_step_or_null() {
    // strong single feature: the one-step model wins
    let strong = common::gaussian_dataset(50, 4, &[(2, 3.0)], 0.5, 46);
    let cfg = SelectorConfig::for_dataset(&strong).with_max_steps(1);
    let path = slasso_run(&strong, &cfg);
    let sel = select_by_ebic(&path, &strong, &CriterionConfig::default());
    assert_eq!(sel.argmin_step, 1);

    // pure noise: the null model wins
    let noise = common::gaussian_dataset(50, 4, &[], 1.0, 47);
    let cfg = SelectorConfig::for_dataset(&noise).with_max_steps(1);
    let path = slasso_run(&noise, &cfg);
    let sel = select_by_ebic(&path, &noise, &CriterionConfig::default());
    assert_eq!(sel.argmin_step, 0);
    assert!(sel.selected.is_empty());
}

#[test]
fn budget_flag_raised_when_minimum_hugs_the_cap() {
    // signal spread over more features than the budget allows
    let n = 80;
    let x = common::orthogonal_columns(n, 12, 48);
    let mut y = Array1::<f64>::zeros(n);
    for j in 0..10 {
        y.scaled_add(3.0, &x.column(j));
    }
    let noise = common::gaussian_vector(n, &mut common::rng(49));
    y.scaled_add(0.3, &noise);
    let d = Dataset::standardize(x, y).unwrap();
    let path = slasso_run(&d, &SelectorConfig::for_dataset(&d).with_max_steps(4));
    assert_eq!(path.termination, Termination::BudgetReached);
    let sel = select_by_ebic(&path, &d, &CriterionConfig::default());
    assert!(sel.budget_suspect, "argmin at {} of {}", sel.argmin_step, path.len());
}

#[test]
fn model_too_large_is_rejected() {
    let d = common::gaussian_dataset(5, 8, &[(0, 1.0)], 0.5, 50);
    let s = ActiveSet::from_indices(0..5);
    assert_eq!(
        ebic(&d, &s, &CriterionConfig::Gamma(1.0)).unwrap_err(),
        EbicError::ModelTooLarge { size: 5, n: 5 }
    );
}

#[test]
fn nested_models_have_nonincreasing_rss_in_scan() {
    let d = common::gaussian_dataset(40, 15, &[(0, 1.0), (5, -2.0)], 1.0, 51);
    let path = slasso_run(&d, &SelectorConfig::for_dataset(&d).with_max_steps(8));
    let mut prev = common::rss_of(&d, &[]);
    for step in &path.steps {
        let cols: Vec<usize> = step.active.iter().collect();
        let rss = common::rss_of(&d, &cols);
        assert!(rss <= prev + 1e-9);
        prev = rss;
    }
}

#[test]
fn exact_fit_reports_perfect_fit_error() {
    let x = common::orthogonal_columns(20, 3, 52);
    let y = x.column(1).to_owned() * 2.0;
    let d = Dataset::from_standardized(x, y).unwrap();
    let s = ActiveSet::from_indices([1]);
    assert_eq!(
        ebic(&d, &s, &CriterionConfig::default()).unwrap_err(),
        EbicError::PerfectFit
    );
}
