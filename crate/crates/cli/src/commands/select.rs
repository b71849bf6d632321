//! The select and path commands: run one selector on a CSV dataset, apply
//! the EBIC, and report selected features with refit coefficients in the
//! raw units of the input file.

use std::io::Write;
use std::path::{Path, PathBuf};

use seqlasso::criteria::{select_by_ebic, CriterionConfig, EbicSelection};
use seqlasso::model::{fit_on_support, Dataset, SelectionPath};
use seqlasso::selectors::{self, SelectorConfig, SelectorKind};

use crate::csvio::{fmt_float, read_dataset};
use crate::errors::CliError;
use crate::{PathArgs, SelectArgs};

pub struct PreparedRun {
    pub names: Vec<String>,
    pub dataset: Dataset,
    pub selector: SelectorKind,
    pub path: SelectionPath,
    pub selection: EbicSelection,
    pub criterion: CriterionConfig,
}

pub fn prepare(
    data: &Path,
    response: &str,
    selector: &str,
    k: Option<usize>,
    gamma: Option<f64>,
    gamma_rule_r: Option<f64>,
) -> Result<PreparedRun, CliError> {
    let loaded = read_dataset(data, response)?;
    let dataset = Dataset::standardize(loaded.x, loaded.y)
        .map_err(|e| CliError::config(e.to_string()))?;
    let selector: SelectorKind = selector.parse().map_err(CliError::Config)?;
    let criterion = match (gamma, gamma_rule_r) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("give either `gamma` or `gamma-rule-r`, not both"))
        }
        (Some(g), None) => CriterionConfig::Gamma(g),
        (None, Some(r)) => CriterionConfig::GammaRule { r },
        (None, None) => CriterionConfig::default(),
    };
    let mut cfg = SelectorConfig::for_dataset(&dataset);
    if let Some(k) = k {
        cfg = cfg.with_max_steps(k);
    }
    let path = selectors::run(selector, &dataset, &cfg);
    let selection = select_by_ebic(&path, &dataset, &criterion);
    Ok(PreparedRun { names: loaded.feature_names, dataset, selector, path, selection, criterion })
}

pub fn run_select(args: &SelectArgs) -> Result<(), CliError> {
    let run = prepare(
        &args.data,
        &args.response,
        &args.selector,
        args.k,
        args.gamma,
        args.gamma_rule_r,
    )?;
    let refit = fit_on_support(&run.dataset, &run.selection.selected)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let raw = run
        .dataset
        .scaling
        .as_ref()
        .map(|s| s.to_raw_units(&refit))
        .unwrap_or_else(|| refit.clone());

    let mut report = String::new();
    report.push_str(&format!(
        "selector: {}  (path of {} steps, K budget {})\n",
        run.selector,
        run.path.len(),
        args.k.map(|k| k.to_string()).unwrap_or_else(|| "default".into())
    ));
    report.push_str(&format!(
        "gamma: {}\n",
        run.criterion.gamma(run.dataset.n, run.dataset.p)
    ));
    report.push_str(&format!(
        "selected {} feature(s) by EBIC (argmin step {}{})\n",
        run.selection.selected.len(),
        run.selection.argmin_step,
        if run.selection.budget_suspect { ", minimum near the budget: consider raising K" } else { "" }
    ));
    report.push_str("feature,coefficient_raw_units\n");
    report.push_str(&format!("(intercept),{}\n", fmt_float(raw.intercept)));
    for j in run.selection.selected.iter() {
        report.push_str(&format!("{},{}\n", run.names[j], fmt_float(raw.get(j))));
    }
    report.push_str("step,ebic\n");
    for (k, v) in run.selection.values.iter().enumerate() {
        report.push_str(&format!("{k},{}\n", fmt_float(*v)));
    }
    print!("{report}");
    if run.selection.budget_suspect {
        eprintln!("warning: the EBIC minimum lands within two steps of K; raise K");
    }

    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("select_report.txt"));
    let mut f = std::fs::File::create(&out)?;
    f.write_all(report.as_bytes())?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn run_path(args: &PathArgs) -> Result<(), CliError> {
    let run = prepare(
        &args.data,
        &args.response,
        &args.selector,
        args.k,
        args.gamma,
        args.gamma_rule_r,
    )?;
    println!("step,entered,active_size,lambda,rss,ebic");
    let mut rows = Vec::new();
    for (i, step) in run.path.steps.iter().enumerate() {
        let entered: Vec<String> =
            step.entered.iter().map(|&j| run.names[j].clone()).collect();
        let ebic = run
            .selection
            .values
            .get(i + 1)
            .copied()
            .unwrap_or(f64::NAN);
        let row = format!(
            "{},{},{},{},{},{}",
            i + 1,
            entered.join("+"),
            step.active.len(),
            fmt_float(step.lambda),
            fmt_float(step.rss),
            fmt_float(ebic)
        );
        println!("{row}");
        rows.push(row);
    }
    println!("termination: {:?}", run.path.termination);
    if let Some(out) = &args.out {
        let mut text = String::from("step,entered,active_size,lambda,rss,ebic\n");
        for row in &rows {
            text.push_str(row);
            text.push('\n');
        }
        std::fs::write(out, text)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
