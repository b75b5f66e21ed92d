use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::features::{compute_feature, Feature, FeatureContext};
use super::{join_predictions, sample_score, PredictionRecord, ScoreMetric};
use crate::error::{Error, Result};
use crate::sample::Sample;

/// How bucket boundaries are chosen; recorded in every report.
pub const BUCKETING_METHOD: &str = "equal-frequency quartiles over (value, id) order; tied values share a bucket";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BucketLabel {
    XS,
    S,
    L,
    XL,
}

impl BucketLabel {
    pub const ALL: [BucketLabel; 4] = [BucketLabel::XS, BucketLabel::S, BucketLabel::L, BucketLabel::XL];

    pub fn as_str(self) -> &'static str {
        match self {
            BucketLabel::XS => "XS",
            BucketLabel::S => "S",
            BucketLabel::L => "L",
            BucketLabel::XL => "XL",
        }
    }
}

impl fmt::Display for BucketLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Members and value range of one bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSpan {
    pub label: BucketLabel,
    /// Smallest and largest member value; `None` for an empty bucket.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucketing {
    /// Always four spans, XS to XL.
    pub spans: Vec<BucketSpan>,
    /// Fewer than four buckets are occupied (too few distinct values).
    pub degenerate: bool,
}

impl Bucketing {
    pub fn label_of(&self, id: &str) -> Option<BucketLabel> {
        self.spans.iter().find(|s| s.ids.iter().any(|i| i == id)).map(|s| s.label)
    }

    pub fn assignment(&self) -> BTreeMap<&str, BucketLabel> {
        self.spans.iter().flat_map(|s| s.ids.iter().map(move |i| (i.as_str(), s.label))).collect()
    }

    pub fn occupied(&self) -> usize {
        self.spans.iter().filter(|s| !s.ids.is_empty()).count()
    }
}

/// Splits `(id, value)` pairs into four ordered buckets of near-equal size.
///
/// Items are ordered by value, then id. Bucket `b` nominally ends at item
/// `ceil((b + 1) n / 4)`; an end that would split a run of equal values is
/// moved past the run, so later buckets can end up empty.
pub fn bucketize(values: &[(String, f64)]) -> Result<Bucketing> {
    if values.is_empty() {
        return Err(Error::EmptyInput("bucketing input"));
    }
    let mut order: Vec<&(String, f64)> = values.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let n = order.len();
    let mut spans = Vec::with_capacity(4);
    let mut start = 0;
    for (b, label) in BucketLabel::ALL.into_iter().enumerate() {
        let mut end = if b == 3 { n } else { ((b + 1) * n).div_ceil(4).max(start) };
        while end > 0 && end < n && order[end].1.total_cmp(&order[end - 1].1) == Ordering::Equal {
            end += 1;
        }
        let members = &order[start..end];
        spans.push(BucketSpan {
            label,
            lo: members.first().map(|m| m.1),
            hi: members.last().map(|m| m.1),
            ids: members.iter().map(|m| m.0.clone()).collect(),
        });
        start = end;
    }
    let occupied = spans.iter().filter(|s| !s.ids.is_empty()).count();
    Ok(Bucketing { spans, degenerate: occupied < 4 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketScore {
    pub label: BucketLabel,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub count: usize,
    /// Mean per-sample score; `None` for an empty bucket.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub feature: Feature,
    pub metric: ScoreMetric,
    pub method: String,
    pub degenerate: bool,
    pub total: usize,
    /// Mean score over all joined samples.
    pub overall: f64,
    pub buckets: Vec<BucketScore>,
}

/// Scores one model's predictions per feature bucket.
pub fn bucket_performance(
    predictions: &[PredictionRecord],
    samples: &[Sample],
    feature: Feature,
    metric: ScoreMetric,
    ctx: &FeatureContext,
) -> Result<BucketReport> {
    let joined = join_predictions(predictions, samples)?;
    if joined.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    let mut values = Vec::with_capacity(joined.len());
    let mut scores = BTreeMap::new();
    for (pred, sample) in &joined {
        values.push((sample.id.clone(), compute_feature(sample, feature, ctx)?));
        scores.insert(sample.id.as_str(), sample_score(sample, pred.answer(), metric)?);
    }
    let bucketing = bucketize(&values)?;
    let buckets = bucketing
        .spans
        .iter()
        .map(|span| BucketScore {
            label: span.label,
            lo: span.lo,
            hi: span.hi,
            count: span.ids.len(),
            score: (!span.ids.is_empty())
                .then(|| span.ids.iter().map(|id| scores[id.as_str()]).sum::<f64>() / span.ids.len() as f64),
        })
        .collect();
    Ok(BucketReport {
        feature,
        metric,
        method: BUCKETING_METHOD.to_string(),
        degenerate: bucketing.degenerate,
        total: joined.len(),
        overall: scores.values().sum::<f64>() / scores.len() as f64,
        buckets,
    })
}
