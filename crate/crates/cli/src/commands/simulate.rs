//! The simulate command: run (n x structure) benchmark cells, print one
//! summary line per cell, and write the results CSV, the mean(sd) table,
//! and a metadata sidecar (which carries the only timestamp, so result
//! files are byte-identical across reruns and thread counts).

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use seqlasso::criteria::CriterionConfig;
use seqlasso::datagen::{CoefType, SimulationConfig, StructureKind, StructureSpec};
use seqlasso::experiments::{mean_sd_fmt, run_cell, Aggregate, CellResult, Mode};
use seqlasso::selectors::SelectorKind;

use crate::config::{parse_list, parse_value, read_config};
use crate::csvio::fmt_float;
use crate::errors::CliError;
use crate::SimulateArgs;

struct Settings {
    ns: Vec<usize>,
    structures: Vec<StructureKind>,
    coef_type: CoefType,
    h: f64,
    h_defaulted: bool,
    rho: Option<f64>,
    replicates: usize,
    seed: u64,
    selectors: Vec<SelectorKind>,
    k: Option<usize>,
    criterion: CriterionConfig,
    threads: Option<usize>,
    out: PathBuf,
    table_out: PathBuf,
    p_override: Option<usize>,
    p0_override: Option<usize>,
}

fn merge_settings(args: &SimulateArgs) -> Result<Settings, CliError> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => HashMap::new(),
    };
    let from_file = |key: &str| file.get(key).map(String::as_str);

    let ns: Vec<usize> = if !args.n.is_empty() {
        args.n.clone()
    } else if let Some(v) = from_file("n") {
        parse_list("n", v)?
    } else {
        vec![100]
    };
    let structures: Vec<StructureKind> = if !args.structure.is_empty() {
        parse_structures(&args.structure)?
    } else if let Some(v) = from_file("structure") {
        parse_list("structure", v).and_then(|names: Vec<String>| parse_structures(&names))?
    } else {
        vec![StructureKind::A1]
    };
    let coef_type: CoefType = match (&args.coef_type, from_file("coef-type")) {
        (Some(v), _) => v.parse().map_err(CliError::Config)?,
        (None, Some(v)) => parse_value("coef-type", v)?,
        (None, None) => CoefType::One,
    };
    let (h, h_defaulted) = match (args.h, from_file("h")) {
        (Some(v), _) => (v, false),
        (None, Some(v)) => (parse_value("h", v)?, false),
        (None, None) => (0.8, true),
    };
    let rho = match (args.rho, from_file("rho")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("rho", v)?),
        (None, None) => None,
    };
    let replicates = match (args.replicates, from_file("replicates")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_value("replicates", v)?,
        (None, None) => 200,
    };
    let seed = match (args.seed, from_file("seed")) {
        (Some(v), _) => v,
        (None, Some(v)) => parse_value("seed", v)?,
        (None, None) => match std::env::var("SEQLASSO_SEED") {
            Ok(v) => parse_value("SEQLASSO_SEED", &v)?,
            Err(_) => 0,
        },
    };
    let selectors: Vec<SelectorKind> = if !args.selectors.is_empty() {
        parse_selectors(&args.selectors)?
    } else if let Some(v) = from_file("selectors") {
        parse_list("selectors", v).and_then(|names: Vec<String>| parse_selectors(&names))?
    } else {
        vec![SelectorKind::Lasso, SelectorKind::Fsr, SelectorKind::SLasso]
    };
    let k = match (args.k, from_file("k")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("k", v)?),
        (None, None) => None,
    };
    let gamma = match (args.gamma, from_file("gamma")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("gamma", v)?),
        (None, None) => None,
    };
    let gamma_rule_r = match (args.gamma_rule_r, from_file("gamma-rule-r")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("gamma-rule-r", v)?),
        (None, None) => None,
    };
    let criterion = match (gamma, gamma_rule_r) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("give either `gamma` or `gamma-rule-r`, not both"))
        }
        (Some(g), None) if g < 0.0 => {
            return Err(CliError::config(format!("gamma = {g} must be non-negative")))
        }
        (Some(g), None) => CriterionConfig::Gamma(g),
        (None, Some(r)) if r <= 1.0 => {
            return Err(CliError::config(format!("gamma-rule-r = {r} must exceed 1")))
        }
        (None, Some(r)) => CriterionConfig::GammaRule { r },
        (None, None) => CriterionConfig::default(),
    };
    let threads = match (args.threads, from_file("threads")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("threads", v)?),
        (None, None) => None,
    };
    let out = args
        .out
        .clone()
        .or_else(|| from_file("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    let table_out = args
        .table_out
        .clone()
        .or_else(|| from_file("table-out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results.txt"));
    let p_override = match (args.p_override, from_file("p-override")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("p-override", v)?),
        (None, None) => None,
    };
    let p0_override = match (args.p0_override, from_file("p0-override")) {
        (Some(v), _) => Some(v),
        (None, Some(v)) => Some(parse_value("p0-override", v)?),
        (None, None) => None,
    };

    Ok(Settings {
        ns,
        structures,
        coef_type,
        h,
        h_defaulted,
        rho,
        replicates,
        seed,
        selectors,
        k,
        criterion,
        threads,
        out,
        table_out,
        p_override,
        p0_override,
    })
}

fn parse_structures(names: &[String]) -> Result<Vec<StructureKind>, CliError> {
    names.iter().map(|s| s.parse().map_err(CliError::Config)).collect()
}

fn parse_selectors(names: &[String]) -> Result<Vec<SelectorKind>, CliError> {
    names.iter().map(|s| s.parse().map_err(CliError::Config)).collect()
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let settings = merge_settings(args)?;
    if settings.h_defaulted {
        println!("note: h not given, using default h = 0.8");
    }

    // validate every cell before any work, so bad configs fail fast
    let mut cells = Vec::new();
    for &kind in &settings.structures {
        for &n in &settings.ns {
            let rho = if kind.needs_rho() { settings.rho } else { None };
            let mut cfg =
                SimulationConfig::new(n, StructureSpec::new(kind, rho), settings.coef_type);
            cfg.h = settings.h;
            cfg.replicates = settings.replicates;
            cfg.seed = settings.seed;
            cfg.selectors = settings.selectors.clone();
            cfg.k_steps = settings.k;
            cfg.criterion = settings.criterion;
            cfg.p_override = settings.p_override;
            cfg.p0_override = settings.p0_override;
            cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
            cells.push(cfg);
        }
    }

    let run_all = || -> Result<Vec<CellResult>, CliError> {
        let mut results = Vec::new();
        for cfg in &cells {
            let cell = run_cell(cfg).map_err(|e| CliError::runtime(e.to_string()))?;
            print_cell_summary(&cell);
            results.push(cell);
        }
        Ok(results)
    };
    let results = match settings.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::runtime(e.to_string()))?;
            pool.install(run_all)?
        }
        None => run_all()?,
    };

    write_results_csv(&settings.out, &results)?;
    write_table(&settings.table_out, &results, &settings.selectors)?;
    write_meta(&settings, &results)?;
    println!(
        "wrote {} and {} ({} cells)",
        settings.out.display(),
        settings.table_out.display(),
        results.len()
    );
    Ok(())
}

fn print_cell_summary(cell: &CellResult) {
    let aggs = cell.aggregates();
    let ebic_rows =
        cell.records.iter().filter(|r| r.mode == Mode::EbicSelected).count();
    let suspect = cell
        .records
        .iter()
        .filter(|r| r.mode == Mode::EbicSelected && r.budget_suspect)
        .count();
    if suspect * 2 >= ebic_rows && ebic_rows > 0 {
        eprintln!(
            "warning: [n={} {}] the EBIC minimum lands within two steps of K in {suspect}/{ebic_rows} replicate runs; raise --k",
            cell.config.n, cell.config.structure.kind
        );
    }
    let fmt_mode = |mode: Mode| {
        aggs.iter()
            .filter(|a| a.mode == mode)
            .map(|a| format!("{} {}", a.selector, mean_sd_fmt(a.mean_pdr, a.sd_pdr)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!(
        "[n={} {} coef={} h={}] p0-stop PDR: {} | ebic PDR: {} | failures {}",
        cell.config.n,
        cell.config.structure.kind,
        cell.config.coef_type,
        cell.config.h,
        fmt_mode(Mode::StoppedAtP0),
        fmt_mode(Mode::EbicSelected),
        cell.failures.len()
    );
}

fn write_results_csv(path: &PathBuf, results: &[CellResult]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "n",
        "structure",
        "coef_type",
        "h",
        "rho",
        "p0",
        "p",
        "selector",
        "mode",
        "mean_pdr",
        "sd_pdr",
        "mean_fdr",
        "sd_fdr",
        "replicates",
        "failures",
    ])?;
    for cell in results {
        for agg in cell.aggregates() {
            w.write_record([
                cell.config.n.to_string(),
                cell.config.structure.kind.to_string(),
                cell.config.coef_type.to_string(),
                fmt_float(cell.config.h),
                cell.config.structure.rho.map(fmt_float).unwrap_or_default(),
                cell.p0.to_string(),
                cell.p.to_string(),
                agg.selector.to_string(),
                agg.mode.to_string(),
                fmt_float(agg.mean_pdr),
                fmt_float(agg.sd_pdr),
                fmt_float(agg.mean_fdr),
                fmt_float(agg.sd_fdr),
                agg.n_replicates.to_string(),
                cell.failures.len().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_table(
    path: &PathBuf,
    results: &[CellResult],
    selectors: &[SelectorKind],
) -> Result<(), CliError> {
    let mut text = String::new();
    for (mode, title) in [
        (Mode::StoppedAtP0, "Sequential procedure stopped at step p0"),
        (Mode::EbicSelected, "Final set selected by EBIC"),
    ] {
        text.push_str(title);
        text.push('\n');
        let names: Vec<String> = selectors.iter().map(|s| s.to_string()).collect();
        text.push_str(&format!("{:<6}{:<8}", "n", "struct"));
        for prefix in ["PDR", "FDR"] {
            for name in &names {
                text.push_str(&format!("{:<14}", format!("{prefix} {name}")));
            }
        }
        text.push('\n');
        for cell in results {
            let aggs = cell.aggregates();
            let find = |s: SelectorKind| -> Option<&Aggregate> {
                aggs.iter().find(|a| a.selector == s && a.mode == mode)
            };
            text.push_str(&format!(
                "{:<6}{:<8}",
                cell.config.n,
                cell.config.structure.kind.to_string()
            ));
            for &sel in selectors {
                let body = find(sel)
                    .map(|a| mean_sd_fmt(a.mean_pdr, a.sd_pdr))
                    .unwrap_or_else(|| "-".to_string());
                text.push_str(&format!("{body:<14}"));
            }
            for &sel in selectors {
                let body = find(sel)
                    .map(|a| mean_sd_fmt(a.mean_fdr, a.sd_fdr))
                    .unwrap_or_else(|| "-".to_string());
                text.push_str(&format!("{body:<14}"));
            }
            text.push('\n');
        }
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_meta(settings: &Settings, results: &[CellResult]) -> Result<(), CliError> {
    let meta_path = settings.out.with_extension("csv.meta.txt");
    let mut f = std::fs::File::create(&meta_path)?;
    writeln!(f, "generated: {:?}", std::time::SystemTime::now())?;
    writeln!(f, "invocation: {}", std::env::args().collect::<Vec<_>>().join(" "))?;
    writeln!(f, "seed: {}", settings.seed)?;
    writeln!(f, "cells: {}", results.len())?;
    for cell in results {
        for (rep, reason) in &cell.failures {
            writeln!(
                f,
                "failure: n={} {} replicate {rep}: {reason}",
                cell.config.n, cell.config.structure.kind
            )?;
        }
    }
    Ok(())
}
