//! The four selection algorithms behind one contract: given a standardized
//! dataset and a step budget, produce a [`SelectionPath`].
//!
//! Sequential lasso, OMP and forward stepwise are greedy and nested; the
//! lasso path is traced by least-angle regression with the sign-change
//! modification and lives in its own submodule.

mod lars;

pub use lars::lars_lasso_path;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::linalg;
use crate::model::{ActiveSet, Coefficients, Dataset, PathStep, SelectionPath, Termination};
use crate::projection::{ProjectionState, COLLINEAR_TOL};

/// Relative tolerance deciding when residual correlations tie for the
/// argmax. With continuous data ties have probability zero; the tie path
/// exists for constructed and analytic designs.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SelectorError {
    #[error("no selectable feature: residual correlations below the stop floor")]
    NothingToSelect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    SLasso,
    Omp,
    Fsr,
    Lasso,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] =
        [SelectorKind::Lasso, SelectorKind::Fsr, SelectorKind::SLasso, SelectorKind::Omp];
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SelectorKind::SLasso => "slasso",
            SelectorKind::Omp => "omp",
            SelectorKind::Fsr => "fsr",
            SelectorKind::Lasso => "lasso",
        };
        f.write_str(s)
    }
}

impl FromStr for SelectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "slasso" | "seqlasso" => Ok(SelectorKind::SLasso),
            "omp" => Ok(SelectorKind::Omp),
            "fsr" => Ok(SelectorKind::Fsr),
            "lasso" => Ok(SelectorKind::Lasso),
            other => Err(format!("unknown selector `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorConfig {
    /// Step budget K.
    pub max_steps: usize,
    /// Relative tolerance for argmax ties.
    pub tie_tol: f64,
    /// Residual-correlation floor below which the signal counts as exhausted.
    pub stop_tol: f64,
}

impl SelectorConfig {
    /// Defaults for a dataset: K = min(ceil(n/2), p) and a stop floor that
    /// only triggers once residual correlations effectively vanish. EBIC,
    /// not the stop floor, is the real model selector.
    pub fn for_dataset(d: &Dataset) -> Self {
        SelectorConfig {
            max_steps: d.n.div_ceil(2).min(d.p),
            tie_tol: TIE_TOL,
            stop_tol: 1e-12 * d.n as f64,
        }
    }

    pub fn with_max_steps(mut self, k: usize) -> Self {
        self.max_steps = k;
        self
    }

    fn feature_cap(&self, d: &Dataset) -> usize {
        self.max_steps.min(d.n.saturating_sub(1)).min(d.p)
    }
}

/// Dispatch a full run of any selector.
pub fn run(kind: SelectorKind, d: &Dataset, cfg: &SelectorConfig) -> SelectionPath {
    match kind {
        SelectorKind::SLasso => slasso_run(d, cfg),
        SelectorKind::Omp => omp_run(d, cfg),
        SelectorKind::Fsr => fsr_run(d, cfg),
        SelectorKind::Lasso => lars_lasso_path(d, cfg),
    }
}

/// Outcome of one sequential-lasso step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub entered: Vec<usize>,
    pub lambda: f64,
    /// True when a tie set failed the cone condition and only its
    /// smallest-index member was admitted.
    pub tie_fallback: bool,
}

/// One step of the sequential lasso: the penalty is tuned to the largest
/// value admitting new nonzero coefficients among the still-penalized
/// features. The entrants are the argmax tie set of the residual
/// correlations, admitted in full only when the partial positive cone
/// condition holds on the projected tie-set columns.
pub fn slasso_step(
    st: &mut ProjectionState,
    d: &Dataset,
    cfg: &SelectorConfig,
) -> Result<StepOutcome, SelectorError> {
    loop {
        let cors = st.residual_correlations(d);
        let max_abs = cors.iter().fold(0.0_f64, |a, (_, c)| a.max(c.abs()));
        if cors.is_empty() || max_abs < cfg.stop_tol {
            return Err(SelectorError::NothingToSelect);
        }
        let lambda = 2.0 * d.n as f64 * max_abs;
        let threshold = (1.0 - cfg.tie_tol) * max_abs;
        let tie: Vec<usize> =
            cors.iter().filter(|(_, c)| c.abs() >= threshold).map(|(j, _)| *j).collect();

        if tie.len() == 1 {
            match st.add_feature(d, tie[0]) {
                Ok(()) => {
                    return Ok(StepOutcome { entered: tie, lambda, tie_fallback: false });
                }
                // flagged and excluded; rescan without it
                Err(_) => continue,
            }
        }

        if cone_admits_all(st, d, &tie) {
            let mut entered = Vec::with_capacity(tie.len());
            for &j in &tie {
                if st.add_feature(d, j).is_ok() {
                    entered.push(j);
                }
            }
            if entered.is_empty() {
                continue;
            }
            return Ok(StepOutcome { entered, lambda, tie_fallback: false });
        }

        // Cone condition failed: deterministic fallback admits only the
        // smallest-index member and flags the step.
        match st.add_feature(d, tie[0]) {
            Ok(()) => {
                return Ok(StepOutcome { entered: vec![tie[0]], lambda, tie_fallback: true });
            }
            Err(_) => continue,
        }
    }
}

/// Partial positive cone condition on the projected tie-set columns:
/// every component of [X~(A)^T X~(A)]^{-1} 1 must be positive. A rank
/// deficient tie set counts as failing.
fn cone_admits_all(st: &ProjectionState, d: &Dataset, tie: &[usize]) -> bool {
    let cols: Vec<Array1<f64>> =
        tie.iter().map(|&j| st.project_out(&d.column(j).to_owned())).collect();
    let k = cols.len();
    let mut gram = Array2::<f64>::zeros((k, k));
    for a in 0..k {
        for b in 0..=a {
            let v = cols[a].dot(&cols[b]);
            gram[[a, b]] = v;
            gram[[b, a]] = v;
        }
    }
    match linalg::solve_spd(&gram, &Array1::ones(k), 1e-10) {
        Some(w) => w.iter().all(|v| *v > 0.0),
        None => false,
    }
}

/// Run the sequential lasso for up to K steps. Features once entered never
/// leave; the path is nested.
pub fn slasso_run(d: &Dataset, cfg: &SelectorConfig) -> SelectionPath {
    assert!(d.standardized, "selector runs require a standardized dataset");
    let cap = cfg.feature_cap(d);
    let mut st = ProjectionState::new(d);
    let mut active = ActiveSet::new();
    let mut steps = Vec::new();
    while active.len() < cap {
        match slasso_step(&mut st, d, cfg) {
            Ok(out) => {
                let step_no = steps.len() + 1;
                for &j in &out.entered {
                    active.insert(j, step_no);
                }
                steps.push(PathStep {
                    active: active.clone(),
                    lambda: out.lambda,
                    entered: out.entered,
                    rss: st.rss(),
                    coefficients: None,
                    tie_fallback: out.tie_fallback,
                });
            }
            Err(SelectorError::NothingToSelect) => {
                return SelectionPath { steps, termination: Termination::SignalExhausted };
            }
        }
    }
    let termination = if cfg.max_steps <= d.n.saturating_sub(1).min(d.p) {
        Termination::BudgetReached
    } else {
        Termination::Saturated
    };
    SelectionPath { steps, termination }
}

/// Orthogonal matching pursuit: one feature per step, the argmax of the
/// absolute residual correlations, ties broken by smallest index.
pub fn omp_run(d: &Dataset, cfg: &SelectorConfig) -> SelectionPath {
    greedy_run(d, cfg, |st, d, _| {
        let cors = st.residual_correlations(d);
        let max_abs = cors.iter().fold(0.0_f64, |a, (_, c)| a.max(c.abs()));
        let pick = cors.iter().find(|(_, c)| c.abs() == max_abs).map(|(j, _)| *j);
        (pick, max_abs)
    })
}

/// Forward stepwise regression: one feature per step maximizing
/// |x_j . r| / sqrt(x_j^T (I - H) x_j), equivalently minimizing the RSS of
/// the augmented model. Columns with residual norm at the collinearity
/// floor are excluded from the argmax.
pub fn fsr_run(d: &Dataset, cfg: &SelectorConfig) -> SelectionPath {
    let nf = d.n as f64;
    let floor = COLLINEAR_TOL * COLLINEAR_TOL * nf;
    greedy_run(d, cfg, move |st, d, _| {
        let cors = st.residual_correlations(d);
        let norms = st.residual_norms(d);
        let max_abs = cors.iter().fold(0.0_f64, |a, (_, c)| a.max(c.abs()));
        let mut best: Option<(usize, f64)> = None;
        for ((j, c), (j2, d2)) in cors.iter().zip(norms.iter()) {
            debug_assert_eq!(j, j2);
            if *d2 <= floor {
                continue;
            }
            let g2 = (c.abs() * nf) / d2.sqrt();
            if best.is_none_or(|(_, b)| g2 > b) {
                best = Some((*j, g2));
            }
        }
        (best.map(|(j, _)| j), max_abs)
    })
}

/// Shared loop for the single-entry greedy selectors. The picker returns
/// the chosen feature (None when nothing qualifies) plus the current
/// max |gamma-hat| used for the stop rule and the recorded lambda.
fn greedy_run<F>(d: &Dataset, cfg: &SelectorConfig, mut pick: F) -> SelectionPath
where
    F: FnMut(&ProjectionState, &Dataset, &SelectorConfig) -> (Option<usize>, f64),
{
    assert!(d.standardized, "selector runs require a standardized dataset");
    let cap = cfg.feature_cap(d);
    let mut st = ProjectionState::new(d);
    let mut active = ActiveSet::new();
    let mut steps = Vec::new();
    while active.len() < cap {
        let (choice, max_abs) = pick(&st, d, cfg);
        if max_abs < cfg.stop_tol {
            return SelectionPath { steps, termination: Termination::SignalExhausted };
        }
        let Some(j) = choice else {
            return SelectionPath { steps, termination: Termination::SignalExhausted };
        };
        if st.add_feature(d, j).is_err() {
            // flagged collinear; rescan
            continue;
        }
        let step_no = steps.len() + 1;
        active.insert(j, step_no);
        steps.push(PathStep {
            active: active.clone(),
            lambda: 2.0 * d.n as f64 * max_abs,
            entered: vec![j],
            rss: st.rss(),
            coefficients: None,
            tie_fallback: false,
        });
    }
    let termination = if cfg.max_steps <= d.n.saturating_sub(1).min(d.p) {
        Termination::BudgetReached
    } else {
        Termination::Saturated
    };
    SelectionPath { steps, termination }
}

/// Result of a KKT verification for the (partially penalized) lasso.
#[derive(Debug, Clone)]
pub struct KktReport {
    pub lambda: f64,
    /// max_j | 2 x~_j . r - lambda sign(beta_j) | over nonzero coefficients.
    pub max_active_violation: f64,
    pub worst_active: Option<usize>,
    /// max_j ( |2 x~_j . r| - lambda ) over zero coefficients.
    pub max_inactive_excess: f64,
    pub worst_inactive: Option<usize>,
}

impl KktReport {
    /// Stationarity within `tol` for active coordinates and within a
    /// relative `tol` of the bound for inactive ones.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_active_violation <= tol && self.max_inactive_excess <= self.lambda * tol + tol
    }

    pub fn max_violation(&self) -> f64 {
        self.max_active_violation.max(self.max_inactive_excess)
    }
}

/// Verify the KKT conditions of the penalized problem after projecting out
/// the unpenalized set (empty for the ordinary lasso): for nonzero beta_j,
/// 2 x~_j . r must equal lambda sign(beta_j); for zero beta_j it must not
/// exceed lambda in magnitude. Report-only.
pub fn kkt_check(
    d: &Dataset,
    s_active: &ActiveSet,
    beta: &Coefficients,
    lambda: f64,
    projected_out: &ActiveSet,
) -> KktReport {
    debug_assert!(lambda >= 0.0);
    let mut st = ProjectionState::new(d);
    for j in projected_out.iter() {
        // a collinear unpenalized column leaves the projector unchanged
        let _ = st.add_feature(d, j);
    }
    let mut resid = st.residual_y().clone();
    for (&j, &b) in &beta.beta {
        if b != 0.0 && !projected_out.contains(j) {
            let xt = st.project_out(&d.column(j).to_owned());
            resid.scaled_add(-b, &xt);
        }
    }
    let grad = d.x().t().dot(&st.project_out(&resid)) * 2.0;

    let mut report = KktReport {
        lambda,
        max_active_violation: 0.0,
        worst_active: None,
        max_inactive_excess: f64::NEG_INFINITY,
        worst_inactive: None,
    };
    for j in 0..d.p {
        if projected_out.contains(j) {
            continue;
        }
        let b = beta.get(j);
        if b != 0.0 {
            debug_assert!(s_active.contains(j), "nonzero coefficient outside the active set");
            let v = (grad[j] - lambda * b.signum()).abs();
            if v > report.max_active_violation {
                report.max_active_violation = v;
                report.worst_active = Some(j);
            }
        } else {
            let excess = grad[j].abs() - lambda;
            if excess > report.max_inactive_excess {
                report.max_inactive_excess = excess;
                report.worst_inactive = Some(j);
            }
        }
    }
    report
}
