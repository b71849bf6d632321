//! Flat key=value configuration files mirroring the simulate flags; flags
//! override file values, and unknown keys are rejected by name.

use std::collections::HashMap;
use std::path::Path;

use crate::errors::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "structure",
    "coef-type",
    "h",
    "rho",
    "replicates",
    "seed",
    "selectors",
    "k",
    "gamma",
    "gamma-rule-r",
    "threads",
    "out",
    "table-out",
    "p-override",
    "p0-override",
];

pub fn read_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(format!(
                "line {} of {} is not key=value: `{raw}`",
                lineno + 1,
                path.display()
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!("unknown key `{key}` in {}", path.display())));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::config(format!("key `{key}` given twice in {}", path.display())));
        }
    }
    Ok(out)
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::config(format!("invalid value `{value}` for `{key}`: {e}")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|tok| parse_value(key, tok.trim())).collect()
}
