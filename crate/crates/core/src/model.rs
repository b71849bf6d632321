//! Core data types shared by every selector: standardized datasets, active
//! sets, selection paths, and least-squares refits on a support.

use std::collections::{BTreeMap, HashMap};

use ndarray::{Array1, Array2, ArrayView1};
use thiserror::Error;

use crate::linalg;

/// Tolerance on column means after standardization.
pub const MEAN_TOL: f64 = 1e-10;
/// Relative tolerance on squared column norms after standardization.
pub const NORM_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum StandardizeError {
    #[error("column {0} has zero sample variance")]
    ConstantColumn(usize),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("x has {rows} rows but y has length {len}")]
    LengthMismatch { rows: usize, len: usize },
    #[error("design matrix has no columns")]
    NoColumns,
    #[error("column {0} violates the standardization invariants")]
    NotStandardized(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("columns of the active set are numerically collinear")]
    RankDeficient,
    #[error("active set has {size} features but only {n} samples")]
    TooManyFeatures { size: usize, n: usize },
}

/// Column centering and scaling applied by [`Dataset::standardize`], kept so
/// fitted coefficients can be mapped back to the raw units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub col_means: Array1<f64>,
    /// Multiplier applied to each centered column so that its squared norm is n.
    pub col_scales: Array1<f64>,
    pub y_mean: f64,
}

impl Scaling {
    /// Map coefficients fitted on the standardized data back to raw units.
    pub fn to_raw_units(&self, coefs: &Coefficients) -> Coefficients {
        let mut beta = BTreeMap::new();
        let mut intercept = self.y_mean;
        for (&j, &b) in &coefs.beta {
            let raw = b * self.col_scales[j];
            intercept -= raw * self.col_means[j];
            beta.insert(j, raw);
        }
        Coefficients { beta, intercept }
    }
}

/// A design matrix and response in the normalized form every selector
/// expects: columns centered with squared norm n, response centered.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    pub n: usize,
    pub p: usize,
    pub standardized: bool,
    pub scaling: Option<Scaling>,
}

impl Dataset {
    /// Center and rescale raw data so that every column j has mean 0 and
    /// squared norm n, and y has mean 0. The applied factors are retained in
    /// `scaling` so coefficients can be mapped back to raw units.
    pub fn standardize(raw_x: Array2<f64>, raw_y: Array1<f64>) -> Result<Self, StandardizeError> {
        let (n, p) = (raw_x.nrows(), raw_x.ncols());
        if n < 2 {
            return Err(StandardizeError::TooFewSamples(n));
        }
        if p == 0 {
            return Err(StandardizeError::NoColumns);
        }
        if raw_y.len() != n {
            return Err(StandardizeError::LengthMismatch { rows: n, len: raw_y.len() });
        }
        if raw_x.iter().any(|v| !v.is_finite()) || raw_y.iter().any(|v| !v.is_finite()) {
            return Err(StandardizeError::NonFinite);
        }

        let nf = n as f64;
        let mut x = raw_x;
        let mut col_means = Array1::<f64>::zeros(p);
        let mut col_scales = Array1::<f64>::zeros(p);
        for j in 0..p {
            let mut col = x.column_mut(j);
            let mean = col.sum() / nf;
            col.mapv_inplace(|v| v - mean);
            let sq = col.dot(&col);
            if sq <= 0.0 {
                return Err(StandardizeError::ConstantColumn(j));
            }
            let scale = (nf / sq).sqrt();
            col.mapv_inplace(|v| v * scale);
            col_means[j] = mean;
            col_scales[j] = scale;
        }
        let y_mean = raw_y.sum() / nf;
        let y = raw_y.mapv(|v| v - y_mean);

        Ok(Dataset {
            x,
            y,
            n,
            p,
            standardized: true,
            scaling: Some(Scaling { col_means, col_scales, y_mean }),
        })
    }

    /// Wrap data that is already in standardized form. Validates the
    /// invariants rather than re-deriving them, so exactly constructed
    /// designs (e.g. scaled orthonormal columns) pass through unchanged.
    pub fn from_standardized(x: Array2<f64>, y: Array1<f64>) -> Result<Self, StandardizeError> {
        let (n, p) = (x.nrows(), x.ncols());
        if n < 2 {
            return Err(StandardizeError::TooFewSamples(n));
        }
        if p == 0 {
            return Err(StandardizeError::NoColumns);
        }
        if y.len() != n {
            return Err(StandardizeError::LengthMismatch { rows: n, len: y.len() });
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(StandardizeError::NonFinite);
        }
        let nf = n as f64;
        for j in 0..p {
            let col = x.column(j);
            if (col.sum() / nf).abs() > MEAN_TOL {
                return Err(StandardizeError::NotStandardized(j));
            }
            if (col.dot(&col) - nf).abs() > NORM_TOL * nf {
                return Err(StandardizeError::NotStandardized(j));
            }
        }
        if (y.sum() / nf).abs() > MEAN_TOL * y.iter().fold(1.0_f64, |a, v| a.max(v.abs())) {
            return Err(StandardizeError::NotStandardized(p));
        }
        Ok(Dataset { x, y, n, p, standardized: true, scaling: None })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.x.column(j)
    }
}

/// An ordered set of selected feature indices, each tagged with the step at
/// which it entered. Selection paths snapshot these; models never shrink.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSet {
    indices: Vec<usize>,
    step_of: HashMap<usize, usize>,
}

impl ActiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from indices that all entered at step 0 (e.g. a true support).
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = Self::new();
        for j in indices {
            s.insert(j, 0);
        }
        s
    }

    /// Add a feature. Panics if the index is already present; the selectors
    /// guarantee distinctness.
    pub fn insert(&mut self, index: usize, step: usize) {
        let prev = self.step_of.insert(index, step);
        assert!(prev.is_none(), "feature {index} inserted twice");
        self.indices.push(index);
    }

    pub fn contains(&self, index: usize) -> bool {
        self.step_of.contains_key(&index)
    }

    pub fn step_of(&self, index: usize) -> Option<usize> {
        self.step_of.get(&index).copied()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices in entry order.
    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn intersection_count(&self, other: &ActiveSet) -> usize {
        self.indices.iter().filter(|j| other.contains(**j)).count()
    }

    pub fn is_subset_of(&self, other: &ActiveSet) -> bool {
        self.indices.iter().all(|j| other.contains(*j))
    }
}

/// Sparse coefficient vector plus the unpenalized intercept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coefficients {
    pub beta: BTreeMap<usize, f64>,
    pub intercept: f64,
}

impl Coefficients {
    pub fn from_support(indices: &[usize], values: &[f64]) -> Self {
        assert_eq!(indices.len(), values.len());
        let beta = indices.iter().copied().zip(values.iter().copied()).collect();
        Coefficients { beta, intercept: 0.0 }
    }

    pub fn get(&self, j: usize) -> f64 {
        self.beta.get(&j).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.beta.keys().copied()
    }

    /// Indices with exactly nonzero values.
    pub fn nonzero_support(&self) -> impl Iterator<Item = usize> + '_ {
        self.beta.iter().filter(|(_, v)| **v != 0.0).map(|(j, _)| *j)
    }

    /// The fitted values X beta on the given dataset (no intercept term;
    /// datasets are centered).
    pub fn predict_centered(&self, d: &Dataset) -> Array1<f64> {
        let mut out = Array1::<f64>::zeros(d.n);
        for (&j, &b) in &self.beta {
            out.scaled_add(b, &d.column(j));
        }
        out
    }
}

/// Why a selector stopped extending its path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The configured step budget was reached.
    BudgetReached,
    /// Residual correlations fell below the stop floor.
    SignalExhausted,
    /// The active set hit the rank budget min(n - 1, p).
    Saturated,
    /// No usable direction remained (degenerate geometry).
    Degenerate,
}

/// One recorded event of a selection path.
#[derive(Debug, Clone)]
pub struct PathStep {
    /// Active set after this step.
    pub active: ActiveSet,
    /// Penalty value at which the step happened, in the 2 n gamma-hat scale.
    pub lambda: f64,
    /// Features that entered at this step (empty for a lasso drop event).
    pub entered: Vec<usize>,
    /// Residual sum of squares at this step: the least-squares residual for
    /// the greedy selectors, the penalized-solution residual for the lasso.
    pub rss: f64,
    /// Lasso coefficients at this breakpoint; `None` for greedy selectors.
    pub coefficients: Option<Coefficients>,
    /// Set when an argmax tie was resolved by the smallest-index fallback.
    pub tie_fallback: bool,
}

/// The full record of a selector run.
#[derive(Debug, Clone)]
pub struct SelectionPath {
    pub steps: Vec<PathStep>,
    pub termination: Termination,
}

impl SelectionPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_active(&self) -> Option<&ActiveSet> {
        self.steps.last().map(|s| &s.active)
    }

    /// First step whose active set has at least `size` features, used for
    /// the stopped-at-p0 evaluation mode.
    pub fn first_step_reaching(&self, size: usize) -> Option<&PathStep> {
        self.steps.iter().find(|s| s.active.len() >= size)
    }
}

/// Ordinary least squares restricted to the active columns. The returned
/// coefficients are in the dataset's (standardized) units; the intercept is
/// the raw response mean when the dataset retains its scaling.
pub fn fit_on_support(d: &Dataset, s: &ActiveSet) -> Result<Coefficients, FitError> {
    let k = s.len();
    if k >= d.n {
        return Err(FitError::TooManyFeatures { size: k, n: d.n });
    }
    let intercept = d.scaling.as_ref().map_or(0.0, |sc| sc.y_mean);
    if k == 0 {
        return Ok(Coefficients { beta: BTreeMap::new(), intercept });
    }
    let idx = s.as_slice();
    let mut gram = Array2::<f64>::zeros((k, k));
    let mut rhs = Array1::<f64>::zeros(k);
    for (a, &ja) in idx.iter().enumerate() {
        let ca = d.column(ja);
        rhs[a] = ca.dot(d.y());
        for (b, &jb) in idx.iter().enumerate().take(a + 1) {
            let v = ca.dot(&d.column(jb));
            gram[[a, b]] = v;
            gram[[b, a]] = v;
        }
    }
    let sol = linalg::solve_spd(&gram, &rhs, 1e-10).ok_or(FitError::RankDeficient)?;
    let beta = idx.iter().copied().zip(sol.iter().copied()).collect();
    Ok(Coefficients { beta, intercept })
}
