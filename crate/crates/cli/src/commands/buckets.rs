use std::path::Path;

use serde::Serialize;

use polykit::report::format_percent;
use polykit::xeval::{bucket_performance, BucketReport, Feature, ScoreMetric};
use polykit::TaskKind;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{file_stem, json_document, write, Header};
use crate::scoring::{load_predictions, primary_metric, EvalSet, ModelPredictions};

#[derive(Debug, Serialize)]
pub struct DatasetBuckets {
    pub dataset: String,
    pub reports: Vec<BucketReport>,
}

#[derive(Debug, Serialize)]
struct BucketsDoc<'a> {
    model: &'a str,
    datasets: &'a [DatasetBuckets],
}

/// Features to use for a task: the requested ones that apply, or every
/// applicable feature when none were requested.
pub fn features_for(requested: &[Feature], task: TaskKind) -> Vec<Feature> {
    if requested.is_empty() {
        Feature::for_task(task)
    } else {
        requested.iter().copied().filter(|f| f.applies_to(task)).collect()
    }
}

pub fn model_buckets(
    cfg: &RunConfig,
    eval: &EvalSet,
    model: &ModelPredictions,
    dataset: Option<&str>,
    features: &[Feature],
    metric: Option<ScoreMetric>,
) -> Result<Vec<DatasetBuckets>, CliError> {
    let ctx = cfg.feature_context()?;
    let mut out = Vec::new();
    for (name, task) in &eval.datasets {
        if dataset.is_some_and(|d| d != name) {
            continue;
        }
        let preds = model.for_dataset(eval, name);
        if preds.is_empty() {
            continue;
        }
        let samples = eval.samples_of(name);
        let metric = metric.unwrap_or_else(|| primary_metric(*task));
        let reports = features_for(features, *task)
            .into_iter()
            .map(|f| bucket_performance(&preds, &samples, f, metric, &ctx))
            .collect::<Result<Vec<_>, _>>()?;
        if !reports.is_empty() {
            out.push(DatasetBuckets { dataset: name.clone(), reports });
        }
    }
    Ok(out)
}

fn bound(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "-".to_string())
}

pub fn buckets_tsv(entries: &[DatasetBuckets]) -> String {
    let mut out = String::from("dataset\tfeature\tmetric\tbucket\tlo\thi\tcount\tscore\n");
    for entry in entries {
        for report in &entry.reports {
            for b in &report.buckets {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    entry.dataset,
                    report.feature,
                    report.metric,
                    b.label,
                    bound(b.lo),
                    bound(b.hi),
                    b.count,
                    b.score.map(format_percent).unwrap_or_else(|| "-".to_string()),
                ));
            }
        }
    }
    out
}

pub fn run(
    cfg: &RunConfig,
    predictions: &Path,
    dataset: Option<&str>,
    features: &[Feature],
    metric: Option<ScoreMetric>,
) -> Result<(), CliError> {
    let eval = EvalSet::load(cfg)?;
    if let Some(d) = dataset {
        if eval.task_of(d).is_none() {
            return Err(CliError::invalid(format!("unknown dataset `{d}`")));
        }
    }
    let features = if features.is_empty() { cfg.features()? } else { features.to_vec() };
    let registry = cfg.registry()?;
    let models = load_predictions(predictions, &eval, &registry, cfg.regime()?)?;
    let out_dir = cfg.out_dir().join("buckets");
    for model in &models {
        let entries = model_buckets(cfg, &eval, model, dataset, &features, metric)?;
        if entries.is_empty() {
            return Err(CliError::invalid("no (dataset, feature) combination to bucket"));
        }
        let degenerate = entries.iter().flat_map(|e| &e.reports).filter(|r| r.degenerate).count();
        let header = Header::new(cfg)
            .with("model", &model.model)
            .with("entity_detection", if cfg.evaluation.entity_heuristic { "heuristic fallback" } else { "annotated" });
        let stem = file_stem(&model.model);
        let tsv = buckets_tsv(&entries);
        write(&out_dir.join(format!("{stem}.tsv")), &(header.tsv() + &tsv))?;
        let doc = BucketsDoc { model: &model.model, datasets: &entries };
        write(&out_dir.join(format!("{stem}.json")), &json_document(&header, &doc))?;
        println!("model {}", model.model);
        print!("{tsv}");
        if degenerate > 0 {
            eprintln!("warning: {degenerate} report(s) have fewer than four occupied buckets");
        }
    }
    Ok(())
}
