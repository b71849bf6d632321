mod common;

use seqlasso::criteria::CriterionConfig;
use seqlasso::datagen::{CoefType, SimulationConfig, StructureKind, StructureSpec};
use seqlasso::experiments::{run_cell, Mode};
use seqlasso::selectors::SelectorKind;

fn small_cell() -> SimulationConfig {
    let mut cfg = SimulationConfig::new(
        60,
        StructureSpec::new(StructureKind::A1, None),
        CoefType::One,
    );
    cfg.h = 0.9;
    cfg.replicates = 6;
    cfg.seed = 81;
    cfg.p_override = Some(40);
    cfg.p0_override = Some(4);
    cfg.k_steps = Some(10);
    cfg
}

#[test]
fn fixed_seed_cell_is_deterministic() {
    let cfg = small_cell();
    let a = run_cell(&cfg).unwrap();
    let b = run_cell(&cfg).unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.payload(), rb.payload());
    }
    assert!(a.failures.is_empty());
}

#[test]
fn thread_count_does_not_change_any_record() {
    let cfg = small_cell();
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = pool1.install(|| run_cell(&cfg)).unwrap();
    let b = pool4.install(|| run_cell(&cfg)).unwrap();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.payload(), rb.payload());
    }
}

#[test]
fn aggregates_recompute_from_replicate_records() {
    let cfg = small_cell();
    let cell = run_cell(&cfg).unwrap();
    for agg in cell.aggregates() {
        let rows: Vec<f64> = cell
            .records
            .iter()
            .filter(|r| r.selector == agg.selector && r.mode == agg.mode)
            .map(|r| r.pdr)
            .collect();
        assert_eq!(rows.len(), agg.n_replicates);
        let mean = rows.iter().sum::<f64>() / rows.len() as f64;
        assert!((mean - agg.mean_pdr).abs() < 1e-12);
    }
}

#[test]
fn stopped_mode_returns_exactly_p0_features_without_ties() {
    let cfg = small_cell();
    let cell = run_cell(&cfg).unwrap();
    for rec in cell.records.iter().filter(|r| r.mode == Mode::StoppedAtP0) {
        assert_eq!(rec.selected_size, cell.p0, "{:?}", rec.selector);
    }
}

#[test]
fn near_noiseless_recovery_has_high_pdr() {
    // strong-signal independent design: the sequential lasso recovers the
    // support nearly always
    let mut cfg = SimulationConfig::new(
        200,
        StructureSpec::new(StructureKind::A1, None),
        CoefType::One,
    );
    cfg.h = 0.99;
    cfg.replicates = 50;
    cfg.seed = 82;
    cfg.selectors = vec![SelectorKind::SLasso];
    cfg.k_steps = Some(9);
    cfg.criterion = CriterionConfig::default();
    let cell = run_cell(&cfg).unwrap();
    let agg = cell
        .aggregates()
        .into_iter()
        .find(|a| a.mode == Mode::StoppedAtP0)
        .unwrap();
    assert!(agg.mean_pdr >= 0.99, "mean PDR {}", agg.mean_pdr);
}

#[test]
fn invalid_configuration_is_rejected() {
    let mut cfg = small_cell();
    cfg.structure = StructureSpec::new(StructureKind::B2, None);
    assert!(run_cell(&cfg).is_err());
    let mut cfg = small_cell();
    cfg.h = 1.0;
    assert!(run_cell(&cfg).is_err());
}

#[test]
fn banded_structure_cell_runs_end_to_end() {
    // exercises the clustered causal placement through the whole pipeline
    let mut cfg = SimulationConfig::new(
        100,
        StructureSpec::new(StructureKind::A3, Some(0.5)),
        CoefType::Two,
    );
    cfg.h = 0.95;
    cfg.replicates = 10;
    cfg.seed = 90;
    cfg.selectors = vec![SelectorKind::SLasso, SelectorKind::Omp];
    cfg.k_steps = Some(16);
    let cell = run_cell(&cfg).unwrap();
    assert!(cell.failures.is_empty());
    assert_eq!(cell.p0, 8);
    assert_eq!(cell.p, 268);
    let agg = cell
        .aggregates()
        .into_iter()
        .find(|a| a.selector == SelectorKind::SLasso && a.mode == Mode::StoppedAtP0)
        .unwrap();
    assert!(agg.mean_pdr > 0.5, "PDR {}", agg.mean_pdr);
}
