//! Least-angle regression with the sign-change modification, tracing the
//! lasso solution path. Each recorded step is a breakpoint: its coefficients
//! are the exact lasso solution at the recorded lambda (in the 2 max|X^T r|
//! scale), so any step can be checked against the lasso KKT conditions.

use std::collections::HashSet;

use ndarray::{Array1, Array2};

use crate::linalg;
use crate::model::{ActiveSet, Coefficients, Dataset, PathStep, SelectionPath, Termination};
use crate::selectors::SelectorConfig;

const STEP_FLOOR: f64 = 1e-12;

/// Trace the lasso path until `max_steps` features are active (or the path
/// ends). Drop events record an empty `entered` list and a shrunken active
/// set; re-entries get a fresh step number.
pub fn lars_lasso_path(d: &Dataset, cfg: &SelectorConfig) -> SelectionPath {
    assert!(d.standardized, "selector runs require a standardized dataset");
    let x = d.x();
    let y = d.y();
    let p = d.p;
    let cap = cfg.feature_cap(d);
    let intercept = d.scaling.as_ref().map_or(0.0, |sc| sc.y_mean);

    let mut beta = Array1::<f64>::zeros(p);
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut entered_at: Vec<usize> = Vec::new();
    let mut excluded: HashSet<usize> = HashSet::new();
    let mut steps: Vec<PathStep> = Vec::new();
    let mut drop_pending = false;

    let snapshot_active = |active: &[usize], entered_at: &[usize]| {
        let mut s = ActiveSet::new();
        for (&j, &at) in active.iter().zip(entered_at) {
            s.insert(j, at);
        }
        s
    };
    let snapshot_beta = |active: &[usize], beta: &Array1<f64>| {
        let mut c = Coefficients { intercept, ..Default::default() };
        for &j in active {
            c.beta.insert(j, beta[j]);
        }
        c
    };

    let max_events = 8 * cap + 64;
    for _ in 0..max_events {
        // residual and correlations at the current breakpoint
        let mut r = y.clone();
        for &j in &active {
            r.scaled_add(-beta[j], &x.column(j));
        }
        let c = x.t().dot(&r);
        let mut cmax = active.iter().map(|&j| c[j].abs()).fold(0.0_f64, f64::max);

        if !drop_pending {
            // entering feature: argmax |c_j| over inactive, smallest index on ties
            let mut entrant = None;
            let mut cbest = 0.0_f64;
            for j in 0..p {
                if active.contains(&j) || excluded.contains(&j) {
                    continue;
                }
                if c[j].abs() > cbest {
                    cbest = c[j].abs();
                    entrant = Some(j);
                }
            }
            if active.is_empty() && (entrant.is_none() || cbest < cfg.stop_tol) {
                return SelectionPath { steps, termination: Termination::SignalExhausted };
            }
            if let Some(j) = entrant {
                if !rank_ok(d, &active, j) {
                    excluded.insert(j);
                    continue;
                }
                active.push(j);
                signs.push(if c[j] >= 0.0 { 1.0 } else { -1.0 });
                entered_at.push(steps.len() + 1);
                cmax = cmax.max(c[j].abs());
                steps.push(PathStep {
                    active: snapshot_active(&active, &entered_at),
                    lambda: 2.0 * c[j].abs(),
                    entered: vec![j],
                    rss: r.dot(&r),
                    coefficients: Some(snapshot_beta(&active, &beta)),
                    tie_fallback: false,
                });
                if active.len() >= cap {
                    let termination = if cfg.max_steps <= d.n.saturating_sub(1).min(d.p) {
                        Termination::BudgetReached
                    } else {
                        Termination::Saturated
                    };
                    return SelectionPath { steps, termination };
                }
            }
        } else {
            drop_pending = false;
        }

        if cmax < cfg.stop_tol {
            return SelectionPath { steps, termination: Termination::SignalExhausted };
        }

        // equiangular direction over the active set
        let k = active.len();
        let mut gram = Array2::<f64>::zeros((k, k));
        for a in 0..k {
            for b in 0..=a {
                let v = x.column(active[a]).dot(&x.column(active[b]));
                gram[[a, b]] = v;
                gram[[b, a]] = v;
            }
        }
        let sign_vec = Array1::from(signs.clone());
        let Some(w0) = linalg::solve_spd(&gram, &sign_vec, 1e-12) else {
            return SelectionPath { steps, termination: Termination::Degenerate };
        };
        let sdot = sign_vec.dot(&w0);
        if sdot <= 0.0 || !sdot.is_finite() {
            return SelectionPath { steps, termination: Termination::Degenerate };
        }
        let aa = 1.0 / sdot.sqrt();
        let w = w0.mapv(|v| v * aa);
        let mut u = Array1::<f64>::zeros(d.n);
        for (i, &j) in active.iter().enumerate() {
            u.scaled_add(w[i], &x.column(j));
        }
        let a_all = x.t().dot(&u);

        // step length to the next breakpoint
        let ls_step = cmax / aa;
        let mut gamma = ls_step;
        for j in 0..p {
            if active.contains(&j) || excluded.contains(&j) {
                continue;
            }
            for val in [(cmax - c[j]) / (aa - a_all[j]), (cmax + c[j]) / (aa + a_all[j])] {
                if val > STEP_FLOOR && val < gamma {
                    gamma = val;
                }
            }
        }
        let mut drop_gamma = f64::INFINITY;
        let mut drop_pos = None;
        for i in 0..k {
            if w[i] != 0.0 {
                let g = -beta[active[i]] / w[i];
                if g > STEP_FLOOR && g < drop_gamma {
                    drop_gamma = g;
                    drop_pos = Some(i);
                }
            }
        }

        if drop_gamma < gamma {
            // sign change first: move to the drop breakpoint, zero the
            // coefficient exactly, and suppress the next entry event
            for (i, &j) in active.iter().enumerate() {
                beta[j] += drop_gamma * w[i];
            }
            let pos = drop_pos.unwrap();
            let dropped = active[pos];
            beta[dropped] = 0.0;
            active.remove(pos);
            signs.remove(pos);
            entered_at.remove(pos);
            drop_pending = true;

            let mut r2 = y.clone();
            for &j in &active {
                r2.scaled_add(-beta[j], &x.column(j));
            }
            steps.push(PathStep {
                active: snapshot_active(&active, &entered_at),
                lambda: 2.0 * (cmax - drop_gamma * aa),
                entered: Vec::new(),
                rss: r2.dot(&r2),
                coefficients: Some(snapshot_beta(&active, &beta)),
                tie_fallback: false,
            });
        } else {
            for (i, &j) in active.iter().enumerate() {
                beta[j] += gamma * w[i];
            }
            if gamma >= ls_step * (1.0 - 1e-12) {
                // full least-squares solution reached; lambda has hit zero
                return SelectionPath { steps, termination: Termination::SignalExhausted };
            }
        }
    }
    SelectionPath { steps, termination: Termination::Degenerate }
}

/// Adding column j must keep the active gram matrix positive definite.
fn rank_ok(d: &Dataset, active: &[usize], j: usize) -> bool {
    let k = active.len() + 1;
    let mut idx = Vec::with_capacity(k);
    idx.extend_from_slice(active);
    idx.push(j);
    let mut gram = Array2::<f64>::zeros((k, k));
    for a in 0..k {
        for b in 0..=a {
            let v = d.column(idx[a]).dot(&d.column(idx[b]));
            gram[[a, b]] = v;
            gram[[b, a]] = v;
        }
    }
    linalg::cholesky(&gram, 1e-12).is_some()
}
