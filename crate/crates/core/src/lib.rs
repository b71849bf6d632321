//! Sequential Lasso feature selection for ultra-high dimensional linear
//! regression, with EBIC model selection, the competing sequential methods
//! (forward stepwise, orthogonal matching pursuit, the LARS-lasso path),
//! finite-sample checkers for the support-recovery conditions, and a
//! reproducible Monte-Carlo benchmark harness.
//!
//! The selection algorithms live in [`selectors`], each producing a
//! [`model::SelectionPath`] over a standardized [`model::Dataset`]. The
//! [`criteria`] module scores paths with the extended BIC, [`conditions`]
//! diagnoses designs, and [`datagen`]/[`experiments`] generate and score
//! the synthetic benchmark cells.
//!
//! ```
//! use seqlasso::{CriterionConfig, Dataset, SelectorConfig};
//!
//! // y depends on the first column only
//! let x = ndarray::array![
//!     [1.0, 0.3], [2.0, -0.4], [3.0, 0.1], [4.0, -0.2],
//!     [5.0, 0.5], [6.0, -0.1], [7.0, 0.2], [8.0, -0.3],
//! ];
//! let y = ndarray::array![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0];
//! let d = Dataset::standardize(x, y).unwrap();
//!
//! let path = seqlasso::slasso_run(&d, &SelectorConfig::for_dataset(&d));
//! let choice = seqlasso::select_by_ebic(&path, &d, &CriterionConfig::default());
//! assert_eq!(choice.selected.as_slice(), &[0]);
//! ```

pub mod conditions;
pub mod criteria;
pub mod datagen;
pub mod experiments;
mod linalg;
pub mod model;
pub mod projection;
pub mod selectors;

pub use criteria::{ebic, select_by_ebic, CriterionConfig};
pub use model::{ActiveSet, Coefficients, Dataset, SelectionPath};
pub use projection::ProjectionState;
pub use selectors::{
    fsr_run, kkt_check, lars_lasso_path, omp_run, slasso_run, slasso_step, SelectorConfig,
    SelectorKind,
};
