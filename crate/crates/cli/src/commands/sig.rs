use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use polykit::xeval::{wilcoxon_with, Alternative, WilcoxonResult};
use polykit::Error;

use super::Pairing;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{json_document, write, Header};
use crate::scoring::{load_single_model, score_model, EvalSet, ModelScores};

#[derive(Debug, Serialize)]
struct SigDoc<'a> {
    pairing: &'a str,
    keys: &'a [String],
    x: &'a [f64],
    y: &'a [f64],
    result: &'a WilcoxonResult,
}

/// Reads one number per line; blank lines and `#` comments are skipped.
pub fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::input(format!("{}:{}: not a number: `{line}`", path.display(), i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

fn summary(r: &WilcoxonResult) -> String {
    if r.no_differences() {
        return "all paired differences are zero; p = 1".to_string();
    }
    let name = |v: serde_json::Value| v.as_str().unwrap_or("?").to_string();
    let method = name(serde_json::to_value(r.method).unwrap_or_default());
    let alternative = name(serde_json::to_value(r.alternative).unwrap_or_default());
    format!(
        "W = {}  W+ = {}  W- = {}  n = {}  p = {} ({method}, {alternative})",
        r.statistic, r.w_plus, r.w_minus, r.n_effective, r.p_value
    )
}

fn emit(cfg: &RunConfig, pairing: &str, keys: &[String], x: &[f64], y: &[f64], alt: Alternative) -> Result<(), CliError> {
    let result = wilcoxon_with(x, y, alt)?;
    let header = Header::new(cfg).with("pairing", pairing);
    let doc = SigDoc { pairing, keys, x, y, result: &result };
    write(&cfg.out_dir().join("sig.json"), &json_document(&header, &doc))?;
    println!("{}", summary(&result));
    Ok(())
}

pub fn run_values(cfg: &RunConfig, x: &Path, y: &Path, alt: Alternative) -> Result<(), CliError> {
    let (xv, yv) = (read_values(x)?, read_values(y)?);
    let keys: Vec<String> = (1..=xv.len().max(yv.len())).map(|i| i.to_string()).collect();
    emit(cfg, "values", &keys, &xv, &yv, alt)
}

fn units(scores: &ModelScores, eval: &EvalSet, pairing: Pairing) -> BTreeMap<String, f64> {
    match pairing {
        Pairing::Language => scores.avg.per_language.clone(),
        Pairing::Dataset => eval
            .datasets
            .iter()
            .filter_map(|(d, _)| scores.primary_row(eval, d).map(|r| (d.clone(), r.overall)))
            .collect(),
        Pairing::Cell => scores.cells(eval).into_iter().map(|((d, l), v)| (format!("{d}/{l}"), v)).collect(),
    }
}

pub fn run_models(cfg: &RunConfig, m1: &Path, m2: &Path, pairing: Pairing, alt: Alternative) -> Result<(), CliError> {
    let eval = EvalSet::load(cfg)?;
    let registry = cfg.registry()?;
    let regime = cfg.regime()?;
    let a = score_model(&eval, &load_single_model(m1, &eval, &registry, regime)?)?;
    let b = score_model(&eval, &load_single_model(m2, &eval, &registry, regime)?)?;
    let (ua, ub) = (units(&a, &eval, pairing), units(&b, &eval, pairing));
    let (ka, kb): (BTreeSet<&String>, BTreeSet<&String>) = (ua.keys().collect(), ub.keys().collect());
    if ka != kb {
        return Err(Error::KeyMismatch {
            only_first: ka.difference(&kb).map(|k| k.to_string()).collect(),
            only_second: kb.difference(&ka).map(|k| k.to_string()).collect(),
        }
        .into());
    }
    let keys: Vec<String> = ua.keys().cloned().collect();
    let x: Vec<f64> = ua.values().copied().collect();
    let y: Vec<f64> = ub.values().copied().collect();
    let name = match pairing {
        Pairing::Language => "language",
        Pairing::Dataset => "dataset",
        Pairing::Cell => "cell",
    };
    emit(cfg, name, &keys, &x, &y, alt)
}
