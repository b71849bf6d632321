//! Monte-Carlo harness: run a configured cell over many replicates, score
//! every selector under both evaluation modes, and aggregate.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::criteria::select_by_ebic;
use crate::datagen::{
    gen_coefficients, gen_design, gen_response, replicate_rng, DatagenError, SimulationConfig,
};
use crate::model::{ActiveSet, Dataset};
use crate::selectors::{self, SelectorConfig, SelectorKind};

/// The two evaluation modes: stop the path the first time the active set
/// reaches p0, or run the full budget and let the EBIC pick the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    StoppedAtP0,
    EbicSelected,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::StoppedAtP0, Mode::EbicSelected];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::StoppedAtP0 => "p0-stop",
            Mode::EbicSelected => "ebic",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p0-stop" | "p0" => Ok(Mode::StoppedAtP0),
            "ebic" => Ok(Mode::EbicSelected),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Positive and false discovery rates of a selected set against the truth.
/// The empty selection scores fdr = 0 by convention.
pub fn metrics(s_star: &ActiveSet, s_0: &ActiveSet) -> (f64, f64) {
    let hit = s_star.intersection_count(s_0);
    let pdr = if s_0.is_empty() { 0.0 } else { hit as f64 / s_0.len() as f64 };
    let fdr = if s_star.is_empty() {
        0.0
    } else {
        (s_star.len() - hit) as f64 / s_star.len() as f64
    };
    (pdr, fdr)
}

/// One scored (replicate, selector, mode) outcome. The runtime is wall
/// clock and excluded from determinism comparisons and result files.
#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub selector: SelectorKind,
    pub mode: Mode,
    pub pdr: f64,
    pub fdr: f64,
    pub selected_size: usize,
    /// Mode 2 only: the EBIC minimum landed within two steps of the budget.
    pub budget_suspect: bool,
    pub runtime: Duration,
}

impl ReplicateRecord {
    /// The deterministic payload: everything except the timing.
    pub fn payload(&self) -> (u64, SelectorKind, Mode, f64, f64, usize) {
        (self.replicate, self.selector, self.mode, self.pdr, self.fdr, self.selected_size)
    }
}

/// Aggregated mean/sd for one (selector, mode) pair of a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub selector: SelectorKind,
    pub mode: Mode,
    pub mean_pdr: f64,
    pub sd_pdr: f64,
    pub mean_fdr: f64,
    pub sd_fdr: f64,
    pub n_replicates: usize,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub config: SimulationConfig,
    pub p0: usize,
    pub p: usize,
    /// Ordered by (replicate, selector position, mode).
    pub records: Vec<ReplicateRecord>,
    /// Replicates that failed outright, with the reason; never silently
    /// dropped.
    pub failures: Vec<(u64, String)>,
}

impl CellResult {
    /// Mean/sd per (selector, mode), recomputed from the per-replicate
    /// records.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut out = Vec::new();
        for &selector in &self.config.selectors {
            for mode in Mode::ALL {
                let rows: Vec<&ReplicateRecord> = self
                    .records
                    .iter()
                    .filter(|r| r.selector == selector && r.mode == mode)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let (mp, sp) = mean_sd(rows.iter().map(|r| r.pdr));
                let (mf, sf) = mean_sd(rows.iter().map(|r| r.fdr));
                out.push(Aggregate {
                    selector,
                    mode,
                    mean_pdr: mp,
                    sd_pdr: sp,
                    mean_fdr: mf,
                    sd_fdr: sf,
                    n_replicates: rows.len(),
                });
            }
        }
        out
    }
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = values.map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Compact mean(sd) formatting for the benchmark tables: ".940(.084)",
/// with means at 1 shown as "1.00".
pub fn mean_sd_fmt(mean: f64, sd: f64) -> String {
    fn one(v: f64) -> String {
        if v >= 0.9995 {
            format!("{v:.2}")
        } else {
            let s = format!("{v:.3}");
            s.strip_prefix('0').map(str::to_owned).unwrap_or(s)
        }
    }
    format!("{}({})", one(mean), one(sd))
}

/// Run one benchmark cell. Replicates execute in parallel but their
/// records are assembled in replicate order, and each replicate draws from
/// its own keyed stream, so results are independent of thread count.
pub fn run_cell(cfg: &SimulationConfig) -> Result<CellResult, DatagenError> {
    cfg.validate()?;
    let (p0, p) = cfg.dims();
    let k = cfg.k();

    let outcomes: Vec<(u64, Result<Vec<ReplicateRecord>, String>)> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|rep| (rep, run_replicate(cfg, rep, p0, p, k)))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut ordered = outcomes;
    ordered.sort_by_key(|(rep, _)| *rep);
    for (rep, outcome) in ordered {
        match outcome {
            Ok(mut rows) => records.append(&mut rows),
            Err(reason) => failures.push((rep, reason)),
        }
    }
    Ok(CellResult { config: cfg.clone(), p0, p, records, failures })
}

fn run_replicate(
    cfg: &SimulationConfig,
    rep: u64,
    p0: usize,
    p: usize,
    k: usize,
) -> Result<Vec<ReplicateRecord>, String> {
    let mut rng = replicate_rng(cfg.seed, rep);
    let sample =
        gen_design(&cfg.structure, cfg.n, p, p0, &mut rng).map_err(|e| e.to_string())?;
    let beta = gen_coefficients(cfg.coef_type, p0, cfg.n, &mut rng);
    let (y, _sigma) =
        gen_response(&sample.x, &sample.s0, &beta, cfg.h, &sample.sigma_causal, &mut rng)
            .map_err(|e| e.to_string())?;
    let d = Dataset::standardize(sample.x, y).map_err(|e| e.to_string())?;
    let s0 = ActiveSet::from_indices(sample.s0.iter().copied());

    let sel_cfg = SelectorConfig::for_dataset(&d).with_max_steps(k);
    let mut rows = Vec::with_capacity(cfg.selectors.len() * 2);
    for &selector in &cfg.selectors {
        let start = Instant::now();
        let path = selectors::run(selector, &d, &sel_cfg);

        // mode 1: the set at the first step reaching p0 (the whole step
        // enters when a tie overshoots), or the final set on short paths
        let stopped = path
            .first_step_reaching(p0)
            .map(|s| s.active.clone())
            .or_else(|| path.final_active().cloned())
            .unwrap_or_default();
        let (pdr, fdr) = metrics(&stopped, &s0);
        rows.push(ReplicateRecord {
            replicate: rep,
            selector,
            mode: Mode::StoppedAtP0,
            pdr,
            fdr,
            selected_size: stopped.len(),
            budget_suspect: false,
            runtime: start.elapsed(),
        });

        // mode 2: EBIC over the whole path
        let ebic_start = Instant::now();
        let selection = select_by_ebic(&path, &d, &cfg.criterion);
        let (pdr, fdr) = metrics(&selection.selected, &s0);
        rows.push(ReplicateRecord {
            replicate: rep,
            selector,
            mode: Mode::EbicSelected,
            pdr,
            fdr,
            selected_size: selection.selected.len(),
            budget_suspect: selection.budget_suspect,
            runtime: ebic_start.elapsed(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_exact_cases() {
        let s0 = ActiveSet::from_indices(0..8);
        assert_eq!(metrics(&s0.clone(), &s0), (1.0, 0.0));
        let disjoint = ActiveSet::from_indices(100..104);
        assert_eq!(metrics(&disjoint, &s0), (0.0, 1.0));
        let empty = ActiveSet::new();
        assert_eq!(metrics(&empty, &s0), (0.0, 0.0));
        // |s0| = 8, 6 hits, 10 selected
        let mixed = ActiveSet::from_indices((0..6).chain(200..204));
        assert_eq!(metrics(&mixed, &s0), (0.75, 0.4));
    }

    #[test]
    fn mean_sd_format_examples() {
        assert_eq!(mean_sd_fmt(0.9404, 0.0839), ".940(.084)");
        assert_eq!(mean_sd_fmt(1.0, 0.0), "1.00(.000)");
        assert_eq!(mean_sd_fmt(0.0604, 0.1), ".060(.100)");
    }
}
