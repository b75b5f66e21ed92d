use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use polykit::report::{format_fixed2, format_signed_fixed2};
use polykit::xeval::{improvement_matrix, pairwise_delta, DiagnosisReport, ImprovementMatrix, ScoreTable};
use polykit::Error;

use super::buckets::model_buckets;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{json_document, write, Header};
use crate::scoring::{load_single_model, score_model, EvalSet, ModelPredictions, ModelScores};

#[derive(Debug, Serialize)]
struct DiagnosisDoc<'a> {
    m1: &'a str,
    m2: &'a str,
    scope: &'a str,
    units: &'static str,
    report: &'a DiagnosisReport,
    matrix: &'a ImprovementMatrix,
}

fn percent(map: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    map.iter().map(|(k, v)| (k.clone(), v * 100.0)).collect()
}

/// Scores of one model in percent, restricted to `dataset` if given.
fn score_table(
    cfg: &RunConfig,
    eval: &EvalSet,
    model: &ModelPredictions,
    scores: &ModelScores,
    dataset: Option<&str>,
) -> Result<ScoreTable, CliError> {
    let (overall, per_language) = match dataset {
        None => (scores.avg.overall * 100.0, percent(&scores.avg.per_language)),
        Some(d) => {
            let row = scores
                .primary_row(eval, d)
                .ok_or_else(|| CliError::invalid(format!("no scored predictions for dataset `{d}`")))?;
            (row.overall * 100.0, percent(&row.per_language))
        }
    };
    let mut per_bucket = BTreeMap::new();
    for entry in model_buckets(cfg, eval, model, dataset, &cfg.features()?, None)? {
        for report in &entry.reports {
            for b in &report.buckets {
                if let Some(score) = b.score {
                    per_bucket.insert(format!("{}/{}/{}", entry.dataset, report.feature, b.label), score * 100.0);
                }
            }
        }
    }
    Ok(ScoreTable { overall, per_language, per_bucket })
}

pub fn diagnosis_tsv(report: &DiagnosisReport) -> String {
    let mut out = String::from("kind\tkey\tm1\tm2\tdelta\n");
    let mut line = |kind: &str, key: &str, m1: Option<f64>, m2: Option<f64>, delta: f64| {
        let fmt = |v: Option<f64>| v.map(format_fixed2).unwrap_or_default();
        out.push_str(&format!("{kind}\t{key}\t{}\t{}\t{}\n", fmt(m1), fmt(m2), format_signed_fixed2(delta)));
    };
    let o = report.overall;
    line("overall", "-", Some(o.m1), Some(o.m2), o.delta);
    for (k, d) in &report.per_language {
        line("language", k, Some(d.m1), Some(d.m2), d.delta);
    }
    for (k, d) in &report.per_bucket {
        line("bucket", k, Some(d.m1), Some(d.m2), d.delta);
    }
    for (k, d) in &report.per_family {
        line("family", k, None, None, *d);
    }
    line("max_positive", report.max_positive.key.as_deref().unwrap_or("-"), None, None, report.max_positive.delta);
    line("max_negative", report.max_negative.key.as_deref().unwrap_or("-"), None, None, report.max_negative.delta);
    out
}

pub fn run(cfg: &RunConfig, m1: &Path, m2: &Path, dataset: Option<&str>) -> Result<(), CliError> {
    let eval = EvalSet::load(cfg)?;
    if let Some(d) = dataset {
        if eval.task_of(d).is_none() {
            return Err(CliError::invalid(format!("unknown dataset `{d}`")));
        }
    }
    let registry = cfg.registry()?;
    let regime = cfg.regime()?;
    let a = load_single_model(m1, &eval, &registry, regime)?;
    let b = load_single_model(m2, &eval, &registry, regime)?;
    let (ids_a, ids_b) = (a.sample_ids(), b.sample_ids());
    if ids_a != ids_b {
        return Err(Error::KeyMismatch {
            only_first: ids_a.difference(&ids_b).map(|s| s.to_string()).collect(),
            only_second: ids_b.difference(&ids_a).map(|s| s.to_string()).collect(),
        }
        .into());
    }
    let (sa, sb) = (score_model(&eval, &a)?, score_model(&eval, &b)?);
    let report = pairwise_delta(&score_table(cfg, &eval, &a, &sa, dataset)?, &score_table(cfg, &eval, &b, &sb, dataset)?)?;

    let cells = |s: &ModelScores| -> BTreeMap<(String, String), f64> {
        s.cells(&eval)
            .into_iter()
            .filter(|((d, _), _)| dataset.is_none_or(|want| want == d))
            .map(|(k, v)| (k, v * 100.0))
            .collect()
    };
    let matrix = improvement_matrix(&cells(&sb), &cells(&sa))?;

    let scope = dataset.unwrap_or("all");
    let header = Header::new(cfg).with("m1", &a.model).with("m2", &b.model).with("scope", scope);
    let out_dir = cfg.out_dir().join("diagnose");
    let tsv = diagnosis_tsv(&report);
    write(&out_dir.join("diagnosis.tsv"), &(header.tsv() + &tsv))?;
    write(&out_dir.join("matrix.tsv"), &(header.tsv() + &matrix.to_tsv()))?;
    let doc = DiagnosisDoc { m1: &a.model, m2: &b.model, scope, units: "percent", report: &report, matrix: &matrix };
    write(&out_dir.join("diagnosis.json"), &json_document(&header, &doc))?;
    println!("{} vs {} ({scope})", a.model, b.model);
    print!("{tsv}");
    Ok(())
}
