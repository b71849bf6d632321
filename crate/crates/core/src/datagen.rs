//! Reproducible generation of the synthetic benchmark designs: dimension
//! rules, coefficient schemes, the six covariance structures, and noise
//! calibrated through the signal fraction h.
//!
//! All randomness flows through a counter-based ChaCha stream keyed by
//! (seed, replicate), so replicates are independent and bit-reproducible
//! regardless of thread count.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::ContinuousCDF;
use thiserror::Error;

use crate::criteria::CriterionConfig;
use crate::selectors::SelectorKind;

#[derive(Debug, Error, PartialEq)]
pub enum DatagenError {
    #[error("structure {0} requires --rho")]
    MissingRho(StructureKind),
    #[error("rho = {0} does not give a positive definite construction")]
    InvalidRho(f64),
    #[error("h = {0} must lie strictly between 0 and 1")]
    InvalidH(f64),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
}

/// The benchmark dimension rule: p0 = [4 n^0.16], p = [5 exp(n^0.3)],
/// brackets meaning rounding to the nearest integer.
pub fn dims(n: usize) -> (usize, usize) {
    assert!(n >= 10, "dimension rule needs n >= 10");
    let nf = n as f64;
    let p0 = (4.0 * nf.powf(0.16)).round() as usize;
    let p = (5.0 * nf.powf(0.3).exp()).round() as usize;
    (p0, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefType {
    /// Random signs (negative with probability 0.4) and magnitudes
    /// 4 n^{-0.15} + |z| with z normal, P(|z| >= 0.1) = 0.25.
    One,
    /// Deterministic beta_j = 2 sqrt(j) n^{-0.15} by support position.
    Two,
}

impl fmt::Display for CoefType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefType::One => "1",
            CoefType::Two => "2",
        })
    }
}

impl FromStr for CoefType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(CoefType::One),
            "2" => Ok(CoefType::Two),
            other => Err(format!("coefficient type must be 1 or 2, got `{other}`")),
        }
    }
}

/// Standard deviation of the magnitude perturbation in type-1 coefficients,
/// derived from the stated tail mass: P(|z| >= 0.1) = 0.25.
pub fn type1_sigma_z() -> f64 {
    let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
    0.1 / normal.inverse_cdf(0.875)
}

/// Coefficient values by support position (position 1 first). Type 1 draws
/// sign then magnitude per position, in order.
pub fn gen_coefficients<R: Rng>(ctype: CoefType, p0: usize, n: usize, rng: &mut R) -> Vec<f64> {
    let scale = (n as f64).powf(-0.15);
    match ctype {
        CoefType::One => {
            let sigma_z = type1_sigma_z();
            (0..p0)
                .map(|_| {
                    let sign = if rng.random::<f64>() < 0.4 { -1.0 } else { 1.0 };
                    let z: f64 = rng.sample(StandardNormal);
                    sign * (4.0 * scale + (z * sigma_z).abs())
                })
                .collect()
        }
        CoefType::Two => (1..=p0).map(|j| 2.0 * (j as f64).sqrt() * scale).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
}

impl StructureKind {
    pub const ALL: [StructureKind; 6] = [
        StructureKind::A1,
        StructureKind::A2,
        StructureKind::A3,
        StructureKind::B1,
        StructureKind::B2,
        StructureKind::B3,
    ];

    pub fn needs_rho(self) -> bool {
        !matches!(self, StructureKind::A1 | StructureKind::B1)
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureKind::A1 => "A1",
            StructureKind::A2 => "A2",
            StructureKind::A3 => "A3",
            StructureKind::B1 => "B1",
            StructureKind::B2 => "B2",
            StructureKind::B3 => "B3",
        })
    }
}

impl FromStr for StructureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(StructureKind::A1),
            "A2" => Ok(StructureKind::A2),
            "A3" => Ok(StructureKind::A3),
            "B1" => Ok(StructureKind::B1),
            "B2" => Ok(StructureKind::B2),
            "B3" => Ok(StructureKind::B3),
            other => Err(format!("unknown structure `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureSpec {
    pub kind: StructureKind,
    pub rho: Option<f64>,
}

impl StructureSpec {
    pub fn new(kind: StructureKind, rho: Option<f64>) -> Self {
        StructureSpec { kind, rho }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        match self.rho {
            None if self.kind.needs_rho() => Err(DatagenError::MissingRho(self.kind)),
            Some(r) if self.kind.needs_rho() && !(0.0..1.0).contains(&r) => {
                Err(DatagenError::InvalidRho(r))
            }
            _ => Ok(()),
        }
    }

    fn rho(&self) -> f64 {
        self.rho.unwrap_or(0.0)
    }
}

/// A raw (unstandardized) design draw together with the causal placement
/// and the population covariance of the causal block, which calibrates the
/// noise level.
#[derive(Debug, Clone)]
pub struct DesignSample {
    pub x: Array2<f64>,
    pub s0: Vec<usize>,
    pub sigma_causal: Array2<f64>,
}

/// Draw one design. Rows are i.i.d. from the structure's construction;
/// the A structures sample their stated covariance directly, the B
/// structures build the correlated non-causal block from the causal one.
pub fn gen_design<R: Rng>(
    spec: &StructureSpec,
    n: usize,
    p: usize,
    p0: usize,
    rng: &mut R,
) -> Result<DesignSample, DatagenError> {
    spec.validate()?;
    if p0 >= p {
        return Err(DatagenError::InvalidDims(format!("p0 = {p0} must be below p = {p}")));
    }
    if p0 == 0 {
        return Err(DatagenError::InvalidDims("p0 must be positive".into()));
    }
    let rho = spec.rho();
    match spec.kind {
        StructureKind::A1 => {
            let x = standard_normal_matrix(n, p, rng);
            Ok(DesignSample { x, s0: (0..p0).collect(), sigma_causal: Array2::eye(p0) })
        }
        StructureKind::A2 => {
            // one-factor form of (1 - rho) I + rho 1 1^T
            let shared = (0..n).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>();
            let (sr, si) = (rho.sqrt(), (1.0 - rho).sqrt());
            let mut x = Array2::<f64>::zeros((n, p));
            for i in 0..n {
                for j in 0..p {
                    let z: f64 = rng.sample(StandardNormal);
                    x[[i, j]] = si * z + sr * shared[i];
                }
            }
            Ok(DesignSample {
                x,
                s0: (0..p0).collect(),
                sigma_causal: constant_corr(p0, rho),
            })
        }
        StructureKind::A3 => {
            // AR(1) recursion reproduces Sigma_ij = rho^|i-j| exactly
            let innov = (1.0 - rho * rho).sqrt();
            let mut x = Array2::<f64>::zeros((n, p));
            for i in 0..n {
                let mut prev: f64 = rng.sample(StandardNormal);
                x[[i, 0]] = prev;
                for j in 1..p {
                    let z: f64 = rng.sample(StandardNormal);
                    prev = rho * prev + innov * z;
                    x[[i, j]] = prev;
                }
            }
            let s0 = a3_clusters(p, p0)?;
            let sigma_causal = Array2::from_shape_fn((p0, p0), |(a, b)| {
                rho.powi((s0[a] as i64 - s0[b] as i64).unsigned_abs() as i32)
            });
            Ok(DesignSample { x, s0, sigma_causal })
        }
        StructureKind::B1 => {
            // causal (Z_j + W_j)/sqrt(2); non-causal (Z_j + sum_causal Z)/sqrt(1 + p0)
            let z = standard_normal_matrix(n, p, rng);
            let w = standard_normal_matrix(n, p0, rng);
            let mut x = Array2::<f64>::zeros((n, p));
            let half = 0.5_f64.sqrt();
            let tail = 1.0 / (1.0 + p0 as f64).sqrt();
            for i in 0..n {
                let zsum: f64 = (0..p0).map(|k| z[[i, k]]).sum();
                for j in 0..p0 {
                    x[[i, j]] = half * (z[[i, j]] + w[[i, j]]);
                }
                for j in p0..p {
                    x[[i, j]] = tail * (z[[i, j]] + zsum);
                }
            }
            Ok(DesignSample { x, s0: (0..p0).collect(), sigma_causal: Array2::eye(p0) })
        }
        StructureKind::B2 | StructureKind::B3 => {
            let mut x = Array2::<f64>::zeros((n, p));
            let sigma_causal = if spec.kind == StructureKind::B2 {
                // constant-correlation causal block via the one-factor form
                let (sr, si) = (rho.sqrt(), (1.0 - rho).sqrt());
                for i in 0..n {
                    let shared: f64 = rng.sample(StandardNormal);
                    for j in 0..p0 {
                        let z: f64 = rng.sample(StandardNormal);
                        x[[i, j]] = si * z + sr * shared;
                    }
                }
                constant_corr(p0, rho)
            } else {
                // AR(1) causal block
                let innov = (1.0 - rho * rho).sqrt();
                for i in 0..n {
                    let mut prev: f64 = rng.sample(StandardNormal);
                    x[[i, 0]] = prev;
                    for j in 1..p0 {
                        let z: f64 = rng.sample(StandardNormal);
                        prev = rho * prev + innov * z;
                        x[[i, j]] = prev;
                    }
                }
                Array2::from_shape_fn((p0, p0), |(a, b)| {
                    rho.powi((a as i64 - b as i64).unsigned_abs() as i32)
                })
            };
            // non-causal: own noise (variance 0.08) plus the causal mean,
            // which dominates the variance by construction
            let eps_sd = 0.08_f64.sqrt();
            for i in 0..n {
                let mean: f64 = (0..p0).map(|k| x[[i, k]]).sum::<f64>() / p0 as f64;
                for j in p0..p {
                    let e: f64 = rng.sample(StandardNormal);
                    x[[i, j]] = eps_sd * e + mean;
                }
            }
            Ok(DesignSample { x, s0: (0..p0).collect(), sigma_causal })
        }
    }
}

/// Response draw: y = X beta + eps with the noise variance solving
/// h = beta' Sigma beta / (beta' Sigma beta + sigma^2) against the
/// population causal covariance. An all-zero beta falls back to unit
/// noise (the pure-noise convention). Returns (y, sigma).
pub fn gen_response<R: Rng>(
    x: &Array2<f64>,
    s0: &[usize],
    beta_values: &[f64],
    h: f64,
    sigma_causal: &Array2<f64>,
    rng: &mut R,
) -> Result<(Array1<f64>, f64), DatagenError> {
    if !(0.0 < h && h < 1.0) {
        return Err(DatagenError::InvalidH(h));
    }
    assert_eq!(s0.len(), beta_values.len());
    let n = x.nrows();
    let mut signal = 0.0;
    for (a, &ba) in beta_values.iter().enumerate() {
        for (b, &bb) in beta_values.iter().enumerate() {
            signal += ba * bb * sigma_causal[[a, b]];
        }
    }
    let sigma = if signal > 0.0 { (signal * (1.0 - h) / h).sqrt() } else { 1.0 };
    let mut y = Array1::<f64>::zeros(n);
    for (k, &j) in s0.iter().enumerate() {
        y.scaled_add(beta_values[k], &x.column(j));
    }
    for v in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v += sigma * e;
    }
    Ok((y, sigma))
}

/// The per-replicate random stream: one ChaCha stream per (seed, replicate)
/// pair, so generation order never depends on scheduling.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate.wrapping_add(1));
    rng
}

/// Deterministic causal placement for the banded structure: clusters of
/// size 3 (with trailing 2s when the count demands it) whose starts are
/// evenly spaced across the feature range.
pub fn a3_clusters(p: usize, p0: usize) -> Result<Vec<usize>, DatagenError> {
    let mut sizes = Vec::new();
    let mut remaining = p0;
    while remaining >= 5 {
        sizes.push(3);
        remaining -= 3;
    }
    match remaining {
        0 => {}
        2 | 3 => sizes.push(remaining),
        4 => {
            sizes.push(2);
            sizes.push(2);
        }
        other => sizes.push(other), // p0 = 1: a single singleton cluster
    }
    let spacing = p / sizes.len().max(4);
    let mut s0 = Vec::with_capacity(p0);
    for (c, &size) in sizes.iter().enumerate() {
        let start = c * spacing;
        if start + size > p || (c > 0 && start < s0[s0.len() - 1] + 1) {
            return Err(DatagenError::InvalidDims(format!(
                "cannot place {p0} causal features in clusters across p = {p}"
            )));
        }
        s0.extend(start..start + size);
    }
    Ok(s0)
}

fn standard_normal_matrix<R: Rng>(n: usize, p: usize, rng: &mut R) -> Array2<f64> {
    let mut x = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            x[[i, j]] = rng.sample(StandardNormal);
        }
    }
    x
}

fn constant_corr(p0: usize, rho: f64) -> Array2<f64> {
    Array2::from_shape_fn((p0, p0), |(a, b)| if a == b { 1.0 } else { rho })
}

/// One cell of the benchmark: everything needed to draw replicates and run
/// the configured selectors on them.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    pub structure: StructureSpec,
    pub coef_type: CoefType,
    /// Signal fraction beta' Sigma beta / (beta' Sigma beta + sigma^2).
    pub h: f64,
    pub replicates: usize,
    pub seed: u64,
    pub selectors: Vec<SelectorKind>,
    /// Step budget K; defaults to min(ceil(n/2), p).
    pub k_steps: Option<usize>,
    pub criterion: CriterionConfig,
    pub p_override: Option<usize>,
    pub p0_override: Option<usize>,
}

impl SimulationConfig {
    pub fn new(n: usize, structure: StructureSpec, coef_type: CoefType) -> Self {
        SimulationConfig {
            n,
            structure,
            coef_type,
            h: 0.8,
            replicates: 200,
            seed: 0,
            selectors: vec![SelectorKind::Lasso, SelectorKind::Fsr, SelectorKind::SLasso],
            k_steps: None,
            criterion: CriterionConfig::default(),
            p_override: None,
            p0_override: None,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        let (d0, d) = dims(self.n);
        (self.p0_override.unwrap_or(d0), self.p_override.unwrap_or(d))
    }

    pub fn k(&self) -> usize {
        let (_, p) = self.dims();
        self.k_steps.unwrap_or_else(|| self.n.div_ceil(2).min(p))
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        self.structure.validate()?;
        if !(0.0 < self.h && self.h < 1.0) {
            return Err(DatagenError::InvalidH(self.h));
        }
        let (p0, p) = self.dims();
        if p0 >= p || p0 == 0 {
            return Err(DatagenError::InvalidDims(format!("p0 = {p0}, p = {p}")));
        }
        if self.selectors.is_empty() {
            return Err(DatagenError::InvalidDims("no selectors configured".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_rule_matches_benchmark_table() {
        assert_eq!(dims(100), (8, 268));
        assert_eq!(dims(200), (9, 672));
        assert_eq!(dims(500), (11, 3170));
    }

    #[test]
    fn type2_first_coefficient() {
        let mut rng = replicate_rng(0, 0);
        let beta = gen_coefficients(CoefType::Two, 8, 100, &mut rng);
        assert!((beta[0] - 1.0023744672545445).abs() < 1e-12);
        assert_eq!(beta.len(), 8);
    }

    #[test]
    fn type1_magnitude_floor() {
        let mut rng = replicate_rng(7, 3);
        let floor = 4.0 * (100.0_f64).powf(-0.15);
        for b in gen_coefficients(CoefType::One, 200, 100, &mut rng) {
            assert!(b.abs() >= floor - 1e-12);
        }
    }

    #[test]
    fn sigma_z_from_tail_mass() {
        assert!((type1_sigma_z() - 0.08693011158689337).abs() < 1e-12);
    }

    #[test]
    fn a3_cluster_sizes() {
        assert_eq!(a3_clusters(268, 8).unwrap(), vec![0, 1, 2, 67, 68, 69, 134, 135]);
        let c9 = a3_clusters(672, 9).unwrap();
        assert_eq!(c9.len(), 9);
        assert_eq!(&c9[..3], &[0, 1, 2]);
        let c11 = a3_clusters(3170, 11).unwrap();
        assert_eq!(c11.len(), 11);
        assert_eq!(&c11[9..], &[2376, 2377]);
    }

    #[test]
    fn same_stream_is_bit_identical() {
        let spec = StructureSpec::new(StructureKind::B2, Some(0.5));
        let d1 = gen_design(&spec, 20, 40, 4, &mut replicate_rng(9, 2)).unwrap();
        let d2 = gen_design(&spec, 20, 40, 4, &mut replicate_rng(9, 2)).unwrap();
        assert_eq!(d1.x, d2.x);
        let d3 = gen_design(&spec, 20, 40, 4, &mut replicate_rng(9, 3)).unwrap();
        assert_ne!(d1.x, d3.x);
    }

    #[test]
    fn missing_rho_is_rejected() {
        let spec = StructureSpec::new(StructureKind::A2, None);
        assert_eq!(spec.validate(), Err(DatagenError::MissingRho(StructureKind::A2)));
    }

    #[test]
    fn response_noise_ratio() {
        // h = 0.5 makes sigma^2 equal the signal variance exactly
        let spec = StructureSpec::new(StructureKind::A1, None);
        let sample = gen_design(&spec, 30, 10, 3, &mut replicate_rng(1, 0)).unwrap();
        let beta = [1.0, -2.0, 0.5];
        let (_, sigma) =
            gen_response(&sample.x, &sample.s0, &beta, 0.5, &sample.sigma_causal, &mut replicate_rng(1, 1))
                .unwrap();
        let signal: f64 = beta.iter().map(|b| b * b).sum();
        assert!((sigma * sigma - signal).abs() < 1e-12);
    }
}
