//! The check-conditions command: support-recovery diagnostics either on a
//! CSV dataset with a declared candidate support, or through the two
//! analytic special-case fixtures.

use seqlasso::conditions::{
    check_a1, check_cone, check_erc, check_irrepresentable, check_mip, gamma_profile, special,
    ConditionReport,
};
use seqlasso::model::{fit_on_support, ActiveSet, Coefficients, Dataset};
use seqlasso::selectors::TIE_TOL;

use crate::csvio::read_dataset;
use crate::errors::CliError;
use crate::CheckArgs;

pub fn run(args: &CheckArgs) -> Result<(), CliError> {
    match args.special_case.as_deref() {
        Some(case) => run_special(case, args),
        None => run_data(args),
    }
}

fn run_special(case: &str, args: &CheckArgs) -> Result<(), CliError> {
    let p0 = args.p0.ok_or_else(|| CliError::config("--special-case requires --p0"))?;
    let reports = match case.to_ascii_uppercase().as_str() {
        "I" => {
            let rho =
                args.rho.ok_or_else(|| CliError::config("--special-case I requires --rho"))?;
            special::case_i_reports(rho, p0).map_err(|e| CliError::config(e.to_string()))?
        }
        "II" => {
            let p = args.p.unwrap_or(3 * p0);
            special::case_ii_reports(p0, p).map_err(|e| CliError::config(e.to_string()))?
        }
        other => {
            return Err(CliError::config(format!("unknown special case `{other}` (use I or II)")))
        }
    };
    print_reports(&reports);
    Ok(())
}

fn run_data(args: &CheckArgs) -> Result<(), CliError> {
    let data = args
        .data
        .as_ref()
        .ok_or_else(|| CliError::config("give either --data or --special-case"))?;
    let response = args
        .response
        .as_ref()
        .ok_or_else(|| CliError::config("data mode requires --response"))?;
    let support_arg = args
        .support
        .as_ref()
        .ok_or_else(|| CliError::config("data mode requires --support"))?;

    let loaded = read_dataset(data, response)?;
    let d = Dataset::standardize(loaded.x, loaded.y)
        .map_err(|e| CliError::config(e.to_string()))?;

    // support tokens are 1-based feature indices or column names
    let mut support = Vec::new();
    for tok in support_arg.split(',') {
        let tok = tok.trim();
        let idx = match tok.parse::<usize>() {
            Ok(i) if (1..=d.p).contains(&i) => i - 1,
            Ok(i) => {
                return Err(CliError::config(format!(
                    "support index {i} out of range 1..={}",
                    d.p
                )))
            }
            Err(_) => loaded
                .feature_names
                .iter()
                .position(|name| name == tok)
                .ok_or_else(|| CliError::config(format!("unknown support column `{tok}`")))?,
        };
        if support.contains(&idx) {
            return Err(CliError::config(format!("support column `{tok}` repeated")));
        }
        support.push(idx);
    }

    let s0 = ActiveSet::from_indices(support.iter().copied());
    let beta = match &args.beta {
        Some(values) => {
            let parsed: Vec<f64> = values
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse()
                        .map_err(|_| CliError::config(format!("invalid beta value `{tok}`")))
                })
                .collect::<Result<_, _>>()?;
            if parsed.len() != support.len() {
                return Err(CliError::config(format!(
                    "--beta has {} values for {} support columns",
                    parsed.len(),
                    support.len()
                )));
            }
            Coefficients::from_support(&support, &parsed)
        }
        None => fit_on_support(&d, &s0).map_err(|e| CliError::runtime(e.to_string()))?,
    };

    let mut reports = Vec::new();
    reports.push(check_mip(&d, support.len()).map_err(|e| CliError::runtime(e.to_string()))?);
    reports.push(
        check_irrepresentable(&d, &s0, &beta).map_err(|e| CliError::runtime(e.to_string()))?,
    );

    // condition the sequential checks on prefixes of the support ordered by
    // coefficient magnitude (the order a sequential method would take)
    let mut order = support.clone();
    order.sort_by(|a, b| {
        beta.get(*b).abs().partial_cmp(&beta.get(*a).abs()).unwrap()
    });
    let mut worst_a1: Option<ConditionReport> = None;
    let mut worst_erc: Option<ConditionReport> = None;
    let mut worst_cone: Option<ConditionReport> = None;
    for k in 0..order.len() {
        let s = ActiveSet::from_indices(order[..k].iter().copied());
        let a1 = check_a1(&d, &s, &beta).map_err(|e| CliError::runtime(e.to_string()))?;
        if worst_a1.as_ref().is_none_or(|w| a1.margin < w.margin) {
            worst_a1 = Some(a1);
        }
        let erc = check_erc(&d, &s, &beta).map_err(|e| CliError::runtime(e.to_string()))?;
        if worst_erc.as_ref().is_none_or(|w| erc.margin < w.margin) {
            worst_erc = Some(erc);
        }
        // the empirical tie set of the residual correlations at this prefix
        let profile = gamma_profile(&d, &s, &beta).map_err(|e| CliError::runtime(e.to_string()))?;
        let max_abs = profile.iter().fold(0.0_f64, |a, (_, g)| a.max(g.abs()));
        if max_abs > 0.0 {
            let tie: Vec<usize> = profile
                .iter()
                .filter(|(_, g)| g.abs() >= (1.0 - TIE_TOL) * max_abs)
                .map(|(j, _)| *j)
                .collect();
            let cone =
                check_cone(&d, &s, &tie).map_err(|e| CliError::runtime(e.to_string()))?;
            if worst_cone.as_ref().is_none_or(|w| cone.margin < w.margin) {
                worst_cone = Some(cone);
            }
        }
    }
    reports.extend([worst_a1, worst_erc, worst_cone].into_iter().flatten());
    print_reports(&reports);
    Ok(())
}

fn print_reports(reports: &[ConditionReport]) {
    println!("{:<28}{:<18}{:<14}witness", "condition", "verdict", "margin");
    for r in reports {
        let verdict = if r.holds {
            "holds"
        } else if r.boundary {
            "fails (boundary)"
        } else {
            "fails"
        };
        let witness = if r.witness.is_empty() {
            String::new()
        } else {
            format!("{:?}", r.witness)
        };
        println!("{:<28}{:<18}{:<+14.4e}{witness}", r.condition, verdict, r.margin);
    }
}
