//! Loading test sets and predictions, and per-model score tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Serialize;

use polykit::xeval::{join_predictions, read_predictions, sample_score, PredictionRecord, ScoreMetric};
use polykit::{read_samples, select_templates, Regime, Role, Sample, Split, TaskKind, Template, TemplateRegistry};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::file_stem;

/// Test samples of every evaluable target dataset.
#[derive(Debug, Clone)]
pub struct EvalSet {
    /// Evaluated datasets in config order.
    pub datasets: Vec<(String, TaskKind)>,
    pub samples: Vec<Sample>,
}

impl EvalSet {
    pub fn load(cfg: &RunConfig) -> Result<Self, CliError> {
        let mut datasets = Vec::new();
        let mut samples = Vec::new();
        for desc in cfg.descriptors()? {
            if desc.role != Role::Target || !desc.task.is_evaluable() {
                continue;
            }
            let path = desc.splits.get(&Split::Test).ok_or_else(|| {
                CliError::invalid(format!("dataset `{}` has no test split", desc.name))
            })?;
            samples.extend(read_samples(path, &desc)?);
            datasets.push((desc.name.clone(), desc.task));
        }
        if datasets.is_empty() {
            return Err(CliError::invalid("config has no evaluable target dataset"));
        }
        Ok(EvalSet { datasets, samples })
    }

    pub fn samples_of(&self, dataset: &str) -> Vec<Sample> {
        self.samples.iter().filter(|s| s.dataset == dataset).cloned().collect()
    }

    pub fn task_of(&self, dataset: &str) -> Option<TaskKind> {
        self.datasets.iter().find(|(d, _)| d == dataset).map(|(_, t)| *t)
    }
}

/// Primary metric of a task: F1 for QA, accuracy for classification.
pub fn primary_metric(task: TaskKind) -> ScoreMetric {
    ScoreMetric::for_task(task)[0]
}

#[derive(Debug, Clone)]
pub struct ModelPredictions {
    pub model: String,
    pub records: Vec<PredictionRecord>,
}

impl ModelPredictions {
    pub fn for_dataset(&self, eval: &EvalSet, dataset: &str) -> Vec<PredictionRecord> {
        let ids: BTreeSet<&str> =
            eval.samples.iter().filter(|s| s.dataset == dataset).map(|s| s.id.as_str()).collect();
        self.records.iter().filter(|r| ids.contains(r.sample_id.as_str())).cloned().collect()
    }

    pub fn sample_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.sample_id.as_str()).collect()
    }
}

/// Reads a prediction file, joins it to the test set and decodes
/// classification outputs with the regime's templates. Records are grouped
/// by `model_id`; records without one take the file name.
pub fn load_predictions(
    path: &Path,
    eval: &EvalSet,
    registry: &TemplateRegistry,
    regime: Regime,
) -> Result<Vec<ModelPredictions>, CliError> {
    let mut records = read_predictions(path)?;
    if records.is_empty() {
        return Err(CliError::input(format!("{}: no predictions", path.display())));
    }
    join_predictions(&records, &eval.samples)?;

    let index: HashMap<&str, &Sample> = eval.samples.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut templates: HashMap<(String, String), &Template> = HashMap::new();
    for rec in &mut records {
        let sample = index[rec.sample_id.as_str()];
        if !sample.task.is_classification() {
            continue;
        }
        let key = (sample.dataset.clone(), sample.language.clone());
        let template = match templates.get(&key) {
            Some(t) => *t,
            None => {
                let t = select_templates(registry.templates(), &[&sample.dataset], regime, &sample.language)?
                    [&sample.dataset];
                templates.insert(key, t);
                t
            }
        };
        rec.decode_with(template);
    }

    let fallback_name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut models: BTreeMap<String, Vec<PredictionRecord>> = BTreeMap::new();
    for mut rec in records {
        if rec.model_id.is_empty() {
            rec.model_id = fallback_name.clone();
        }
        models.entry(rec.model_id.clone()).or_default().push(rec);
    }
    for (model, recs) in &models {
        let mut seen = BTreeSet::new();
        if let Some(dup) = recs.iter().find(|r| !seen.insert(r.sample_id.as_str())) {
            return Err(CliError::invalid(format!("model `{model}` has two predictions for `{}`", dup.sample_id)));
        }
    }
    let stems: BTreeSet<String> = models.keys().map(|m| file_stem(m)).collect();
    if stems.len() != models.len() {
        return Err(CliError::invalid("model ids collide after conversion to file names"));
    }
    Ok(models.into_iter().map(|(model, records)| ModelPredictions { model, records }).collect())
}

/// Loads a file that must hold exactly one model.
pub fn load_single_model(
    path: &Path,
    eval: &EvalSet,
    registry: &TemplateRegistry,
    regime: Regime,
) -> Result<ModelPredictions, CliError> {
    let mut models = load_predictions(path, eval, registry, regime)?;
    if models.len() != 1 {
        let names: Vec<&str> = models.iter().map(|m| m.model.as_str()).collect();
        return Err(CliError::invalid(format!(
            "{}: expected one model, found {}",
            path.display(),
            names.join(", ")
        )));
    }
    Ok(models.remove(0))
}

/// Mean score of one dataset under one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub dataset: String,
    pub metric: ScoreMetric,
    /// Fractions in [0, 1], keyed by language.
    pub per_language: BTreeMap<String, f64>,
    /// Mean of the per-language values.
    pub overall: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageRow {
    pub per_language: BTreeMap<String, f64>,
    /// Mean over all metric rows.
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelScores {
    pub model: String,
    pub languages: Vec<String>,
    pub rows: Vec<ScoreRow>,
    pub avg: AverageRow,
    pub predicted: usize,
    /// Test samples the model has no prediction for; not scored.
    pub unpredicted: usize,
    /// Classification outputs that needed a fallback decoding step.
    pub fallback_decodes: usize,
}

impl ModelScores {
    /// Primary-metric score per (dataset, language).
    pub fn cells(&self, eval: &EvalSet) -> BTreeMap<(String, String), f64> {
        let mut out = BTreeMap::new();
        for row in &self.rows {
            let primary = eval.task_of(&row.dataset).map(primary_metric);
            if primary == Some(row.metric) {
                for (lang, v) in &row.per_language {
                    out.insert((row.dataset.clone(), lang.clone()), *v);
                }
            }
        }
        out
    }

    pub fn primary_row(&self, eval: &EvalSet, dataset: &str) -> Option<&ScoreRow> {
        let metric = primary_metric(eval.task_of(dataset)?);
        self.rows.iter().find(|r| r.dataset == dataset && r.metric == metric)
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn score_model(eval: &EvalSet, preds: &ModelPredictions) -> Result<ModelScores, CliError> {
    let joined = join_predictions(&preds.records, &eval.samples)?;
    let mut rows = Vec::new();
    for (dataset, task) in &eval.datasets {
        let members: Vec<_> = joined.iter().filter(|(_, s)| &s.dataset == dataset).collect();
        if members.is_empty() {
            continue;
        }
        for &metric in ScoreMetric::for_task(*task) {
            let mut by_lang: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for (pred, sample) in &members {
                by_lang.entry(sample.language.clone()).or_default().push(sample_score(sample, pred.answer(), metric)?);
            }
            let per_language: BTreeMap<String, f64> =
                by_lang.into_iter().map(|(l, v)| (l, mean(v).expect("non-empty group"))).collect();
            rows.push(ScoreRow {
                dataset: dataset.clone(),
                metric,
                overall: mean(per_language.values().copied()).expect("non-empty row"),
                per_language,
                count: members.len(),
            });
        }
    }
    let languages: Vec<String> =
        rows.iter().flat_map(|r| r.per_language.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let avg = AverageRow {
        per_language: languages
            .iter()
            .filter_map(|l| mean(rows.iter().filter_map(|r| r.per_language.get(l).copied())).map(|m| (l.clone(), m)))
            .collect(),
        overall: mean(rows.iter().map(|r| r.overall)).unwrap_or(0.0),
    };
    Ok(ModelScores {
        model: preds.model.clone(),
        languages,
        rows,
        avg,
        predicted: joined.len(),
        unpredicted: eval.samples.len() - preds.sample_ids().len(),
        fallback_decodes: preds.records.iter().filter(|r| r.decoded.as_ref().is_some_and(|d| d.fallback_used)).count(),
    })
}
