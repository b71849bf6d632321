//! Incremental orthogonal projection onto the span of the active columns.
//!
//! The projector H(s) is never formed. A modified Gram-Schmidt basis with
//! one reorthogonalization pass is grown one column at a time, and the
//! residual response (I - H(s)) y is maintained alongside it. Residual
//! correlations over the inactive columns are then single mat-vec products.

use std::collections::{BTreeSet, HashSet};

use ndarray::Array1;
use thiserror::Error;

use crate::model::Dataset;

/// Relative residual-norm floor below which a column counts as collinear
/// with the active set: such a column can never be selected.
pub const COLLINEAR_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("column {0} is numerically collinear with the active set")]
    Collinear(usize),
}

#[derive(Debug, Clone)]
pub struct ProjectionState {
    basis: Vec<Array1<f64>>,
    owner_index: Vec<usize>,
    residual_y: Array1<f64>,
    /// Cumulative squared projection mass per feature: sum_i (b_i . x_j)^2.
    projected_sq: Array1<f64>,
    active: HashSet<usize>,
    excluded: BTreeSet<usize>,
}

impl ProjectionState {
    pub fn new(d: &Dataset) -> Self {
        ProjectionState {
            basis: Vec::new(),
            owner_index: Vec::new(),
            residual_y: d.y().clone(),
            projected_sq: Array1::zeros(d.p),
            active: HashSet::new(),
            excluded: BTreeSet::new(),
        }
    }

    /// Number of basis vectors (= active features).
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.active.contains(&j)
    }

    pub fn is_excluded(&self, j: usize) -> bool {
        self.excluded.contains(&j)
    }

    /// Features rejected as collinear so far.
    pub fn excluded(&self) -> impl Iterator<Item = usize> + '_ {
        self.excluded.iter().copied()
    }

    /// Active features in the order they were added.
    pub fn owner_indices(&self) -> &[usize] {
        &self.owner_index
    }

    pub fn basis(&self) -> &[Array1<f64>] {
        &self.basis
    }

    /// Current residual (I - H(s)) y.
    pub fn residual_y(&self) -> &Array1<f64> {
        &self.residual_y
    }

    /// Residual sum of squares of the least-squares fit on the active set.
    pub fn rss(&self) -> f64 {
        self.residual_y.dot(&self.residual_y)
    }

    /// Apply I - H(s) to an arbitrary n-vector.
    pub fn project_out(&self, v: &Array1<f64>) -> Array1<f64> {
        let mut r = v.clone();
        for b in &self.basis {
            let c = b.dot(&r);
            r.scaled_add(-c, b);
        }
        // second pass guards orthogonality on ill-conditioned spans
        for b in &self.basis {
            let c = b.dot(&r);
            r.scaled_add(-c, b);
        }
        r
    }

    /// Extend the basis with column j. Rejects (and permanently flags) the
    /// column when its residual norm falls below `COLLINEAR_TOL * sqrt(n)`,
    /// leaving the state unchanged apart from the flag.
    pub fn add_feature(&mut self, d: &Dataset, j: usize) -> Result<(), ProjectionError> {
        assert!(!self.is_active(j), "feature {j} is already active");
        let v = self.project_out(&d.column(j).to_owned());
        let norm = v.dot(&v).sqrt();
        if norm <= COLLINEAR_TOL * (d.n as f64).sqrt() {
            self.excluded.insert(j);
            return Err(ProjectionError::Collinear(j));
        }
        let q = v / norm;
        let c = q.dot(&self.residual_y);
        self.residual_y.scaled_add(-c, &q);
        let t = d.x().t().dot(&q);
        self.projected_sq.zip_mut_with(&t, |acc, ti| *acc += ti * ti);
        self.basis.push(q);
        self.owner_index.push(j);
        self.active.insert(j);
        Ok(())
    }

    /// Residual correlations gamma-hat(j) = x_j . (I - H(s)) y / n over the
    /// inactive columns. Active and collinear-flagged features are absent.
    pub fn residual_correlations(&self, d: &Dataset) -> Vec<(usize, f64)> {
        let t = d.x().t().dot(&self.residual_y);
        let nf = d.n as f64;
        (0..d.p)
            .filter(|j| !self.is_active(*j) && !self.is_excluded(*j))
            .map(|j| (j, t[j] / nf))
            .collect()
    }

    /// Squared residual norms ||(I - H(s)) x_j||^2 over the inactive
    /// columns, maintained incrementally; values lie in [0, n].
    pub fn residual_norms(&self, d: &Dataset) -> Vec<(usize, f64)> {
        let nf = d.n as f64;
        (0..d.p)
            .filter(|j| !self.is_active(*j) && !self.is_excluded(*j))
            .map(|j| (j, (nf - self.projected_sq[j]).max(0.0)))
            .collect()
    }
}
