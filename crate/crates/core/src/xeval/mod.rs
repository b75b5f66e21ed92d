//! Interpretable evaluation over externally produced predictions.

mod bucket;
mod diagnose;
mod features;
mod wilcoxon;

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bucket::{
    bucket_performance, bucketize, BucketLabel, BucketReport, BucketScore, BucketSpan, Bucketing, BUCKETING_METHOD,
};
pub use diagnose::{
    improvement_matrix, pairwise_delta, Delta, DiagnosisReport, ImprovementMatrix, MatrixRow, ScoreTable,
};
pub use features::{compute_feature, dataset_feature, dataset_feature_by_language, Feature, FeatureContext};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_with, Alternative, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N};

use crate::error::{Error, Result};
use crate::metrics::{exact_match, f1_score};
use crate::sample::{Sample, TaskKind};
use crate::template::{decode_prediction, Decoded, Template};

/// How many unjoinable ids an error message lists.
const SHOWN_IDS: usize = 10;

/// One model output for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(default)]
    pub model_id: String,
    pub sample_id: String,
    #[serde(rename = "output")]
    pub raw_output: String,
    #[serde(skip)]
    pub decoded: Option<Decoded>,
}

impl PredictionRecord {
    pub fn new(model_id: impl Into<String>, sample_id: impl Into<String>, raw_output: impl Into<String>) -> Self {
        PredictionRecord {
            model_id: model_id.into(),
            sample_id: sample_id.into(),
            raw_output: raw_output.into(),
            decoded: None,
        }
    }

    pub fn decode_with(&mut self, template: &Template) -> &Decoded {
        self.decoded.insert(decode_prediction(template, &self.raw_output))
    }

    /// Decoded answer if available, else the stripped raw output.
    pub fn answer(&self) -> &str {
        match &self.decoded {
            Some(d) => &d.answer,
            None => self.raw_output.trim(),
        }
    }
}

/// Reads a prediction file: one JSON object per line with `model_id`,
/// `sample_id` and `output`. Blank lines are skipped.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(file).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_predictions<R: Read>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<predictions>", e))?;
        if i == 0 && line.starts_with('\u{feff}') {
            return Err(Error::ByteOrderMark);
        }
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

/// Per-sample scoring function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScoreMetric {
    #[serde(rename = "f1")]
    F1,
    #[serde(rename = "em")]
    ExactMatch,
    #[serde(rename = "accuracy")]
    Accuracy,
}

impl ScoreMetric {
    pub const ALL: [ScoreMetric; 3] = [ScoreMetric::F1, ScoreMetric::ExactMatch, ScoreMetric::Accuracy];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMetric::F1 => "f1",
            ScoreMetric::ExactMatch => "em",
            ScoreMetric::Accuracy => "accuracy",
        }
    }

    pub fn applies_to(self, task: TaskKind) -> bool {
        match self {
            ScoreMetric::F1 | ScoreMetric::ExactMatch => task == TaskKind::QaExtractive,
            ScoreMetric::Accuracy => task.is_classification(),
        }
    }

    /// Metrics reported for a task, in column order.
    pub fn for_task(task: TaskKind) -> &'static [ScoreMetric] {
        if task == TaskKind::QaExtractive {
            &[ScoreMetric::F1, ScoreMetric::ExactMatch]
        } else if task.is_classification() {
            &[ScoreMetric::Accuracy]
        } else {
            &[]
        }
    }
}

impl fmt::Display for ScoreMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(ScoreMetric::F1),
            "em" | "exact_match" => Ok(ScoreMetric::ExactMatch),
            "accuracy" | "acc" => Ok(ScoreMetric::Accuracy),
            _ => Err(format!("unknown metric `{s}`")),
        }
    }
}

/// Score in [0, 1] of one answer against a sample's golds.
pub fn sample_score(sample: &Sample, answer: &str, metric: ScoreMetric) -> Result<f64> {
    if !metric.applies_to(sample.task) {
        return Err(Error::InapplicableMetric { metric: metric.as_str().to_string(), task: sample.task.to_string() });
    }
    match metric {
        ScoreMetric::F1 => f1_score(answer, &sample.golds, &sample.language),
        ScoreMetric::ExactMatch => exact_match(answer, &sample.golds, &sample.language),
        ScoreMetric::Accuracy => {
            let label = sample.label().ok_or_else(|| Error::MissingField {
                sample_id: sample.id.clone(),
                field: "label".to_string(),
            })?;
            Ok(if answer.trim() == label { 1.0 } else { 0.0 })
        }
    }
}

/// Pairs each prediction with its sample, in prediction order.
///
/// Fails if any prediction names an unknown sample id.
pub fn join_predictions<'p, 's>(
    predictions: &'p [PredictionRecord],
    samples: &'s [Sample],
) -> Result<Vec<(&'p PredictionRecord, &'s Sample)>> {
    let index: HashMap<&str, &Sample> = samples.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut joined = Vec::with_capacity(predictions.len());
    let mut missing = Vec::new();
    for p in predictions {
        match index.get(p.sample_id.as_str()) {
            Some(s) => joined.push((p, *s)),
            None => missing.push(p.sample_id.clone()),
        }
    }
    if !missing.is_empty() {
        let count = missing.len();
        missing.truncate(SHOWN_IDS);
        return Err(Error::UnjoinableIds { count, shown: missing });
    }
    Ok(joined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::TemplateRegistry;

    fn qa(id: &str, golds: &[&str]) -> Sample {
        Sample {
            id: id.into(),
            language: "en".into(),
            dataset: "XQuAD".into(),
            task: TaskKind::QaExtractive,
            fields: [("question", "q"), ("context", "c")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            golds: golds.iter().map(|g| g.to_string()).collect(),
        }
    }

    fn cls(id: &str, label: &str) -> Sample {
        Sample {
            id: id.into(),
            language: "en".into(),
            dataset: "MARC".into(),
            task: TaskKind::SentimentCls,
            fields: [("t1".to_string(), "fine".to_string())].into_iter().collect(),
            golds: vec![label.into()],
        }
    }

    #[test]
    fn prediction_file_format() {
        let text = "{\"model_id\":\"m1\",\"sample_id\":\"a\",\"output\":\"Ann\"}\n\n{\"sample_id\":\"b\",\"output\":\" x \"}\n";
        let preds = parse_predictions(text.as_bytes()).unwrap();
        assert_eq!(preds.len(), 2);
        assert_eq!(preds[0], PredictionRecord::new("m1", "a", "Ann"));
        assert_eq!(preds[1].answer(), "x");
        assert!(matches!(parse_predictions("{oops".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(parse_predictions("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn scores_per_metric() {
        let s = qa("a", &["Ann Lee"]);
        assert_eq!(sample_score(&s, "Ann Lee", ScoreMetric::ExactMatch).unwrap(), 1.0);
        assert!((sample_score(&s, "Ann", ScoreMetric::F1).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(sample_score(&s, "x", ScoreMetric::Accuracy), Err(Error::InapplicableMetric { .. })));
        let c = cls("b", "positive");
        assert_eq!(sample_score(&c, "positive", ScoreMetric::Accuracy).unwrap(), 1.0);
        assert_eq!(sample_score(&c, "negative", ScoreMetric::Accuracy).unwrap(), 0.0);
    }

    #[test]
    fn decoded_labels_are_scored() {
        let reg = TemplateRegistry::builtin_english();
        let t = reg.get("marc-en-unified").unwrap();
        let mut p = PredictionRecord::new("m", "b", "(B) No.");
        p.decode_with(t);
        assert_eq!(p.answer(), "negative");
        assert_eq!(sample_score(&cls("b", "negative"), p.answer(), ScoreMetric::Accuracy).unwrap(), 1.0);
    }

    #[test]
    fn unjoinable_ids_are_listed() {
        let samples = vec![qa("a", &["x"])];
        let preds: Vec<_> = (0..12).map(|i| PredictionRecord::new("m", format!("z{i}"), "x")).collect();
        match join_predictions(&preds, &samples) {
            Err(Error::UnjoinableIds { count, shown }) => {
                assert_eq!(count, 12);
                assert_eq!(shown.len(), 10);
            }
            other => panic!("{other:?}"),
        }
        let ok = [PredictionRecord::new("m", "a", "x")];
        assert_eq!(join_predictions(&ok, &samples).unwrap().len(), 1);
    }
}
