use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::family_of;
use crate::report::format_signed_fixed2;

/// Scores of one model, in whatever unit the caller uses throughout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub overall: f64,
    /// Keyed by language code.
    pub per_language: BTreeMap<String, f64>,
    /// Keyed by `feature/bucket`.
    #[serde(default)]
    pub per_bucket: BTreeMap<String, f64>,
}

impl ScoreTable {
    pub fn overall(score: f64) -> Self {
        ScoreTable { overall: score, ..ScoreTable::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub m1: f64,
    pub m2: f64,
    /// `m1 - m2`.
    pub delta: f64,
}

impl Delta {
    fn new(m1: f64, m2: f64) -> Self {
        Delta { m1, m2, delta: m1 - m2 }
    }
}

/// A largest gain or loss and where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub key: Option<String>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub overall: Delta,
    pub per_language: BTreeMap<String, Delta>,
    pub per_bucket: BTreeMap<String, Delta>,
    /// Largest delta among all listed ones, or 0 when none is positive.
    pub max_positive: Extreme,
    /// Smallest delta among all listed ones, or 0 when none is negative.
    pub max_negative: Extreme,
    /// Mean per-language delta within each language family.
    pub per_family: BTreeMap<String, f64>,
}

fn check_keys<'a, V>(a: &'a BTreeMap<String, V>, b: &'a BTreeMap<String, V>) -> Result<()> {
    let ka: BTreeSet<&String> = a.keys().collect();
    let kb: BTreeSet<&String> = b.keys().collect();
    if ka == kb {
        return Ok(());
    }
    Err(Error::KeyMismatch {
        only_first: ka.difference(&kb).map(|k| k.to_string()).collect(),
        only_second: kb.difference(&ka).map(|k| k.to_string()).collect(),
    })
}

fn deltas(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Result<BTreeMap<String, Delta>> {
    check_keys(a, b)?;
    Ok(a.iter().map(|(k, v)| (k.clone(), Delta::new(*v, b[k]))).collect())
}

/// Compares model M1 against M2 on identical key sets.
pub fn pairwise_delta(m1: &ScoreTable, m2: &ScoreTable) -> Result<DiagnosisReport> {
    let per_language = deltas(&m1.per_language, &m2.per_language)?;
    let per_bucket = deltas(&m1.per_bucket, &m2.per_bucket)?;
    let overall = Delta::new(m1.overall, m2.overall);

    let mut max_positive = Extreme { key: None, delta: 0.0 };
    let mut max_negative = Extreme { key: None, delta: 0.0 };
    let listed = std::iter::once(("overall".to_string(), overall.delta))
        .chain(per_language.iter().map(|(k, d)| (format!("language:{k}"), d.delta)))
        .chain(per_bucket.iter().map(|(k, d)| (format!("bucket:{k}"), d.delta)));
    for (key, d) in listed {
        if d > max_positive.delta {
            max_positive = Extreme { key: Some(key), delta: d };
        } else if d < max_negative.delta {
            max_negative = Extreme { key: Some(key), delta: d };
        }
    }

    let mut families: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (lang, d) in &per_language {
        let entry = families.entry(family_of(lang)?.to_string()).or_default();
        entry.0 += d.delta;
        entry.1 += 1;
    }
    let per_family = families.into_iter().map(|(f, (sum, n))| (f, sum / n as f64)).collect();

    Ok(DiagnosisReport { overall, per_language, per_bucket, max_positive, max_negative, per_family })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub language: String,
    pub family: String,
    /// One cell per dataset column; `None` where the pair was not scored.
    pub cells: Vec<Option<f64>>,
}

/// Per-(dataset, language) deltas, rows ordered by family then language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementMatrix {
    pub datasets: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

impl ImprovementMatrix {
    pub fn get(&self, dataset: &str, language: &str) -> Option<f64> {
        let col = self.datasets.iter().position(|d| d == dataset)?;
        self.rows.iter().find(|r| r.language == language)?.cells[col]
    }

    /// Tab-separated table: `family`, `language`, then one column per
    /// dataset. Missing cells are empty.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("family\tlanguage");
        for d in &self.datasets {
            out.push('\t');
            out.push_str(d);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.family);
            out.push('\t');
            out.push_str(&row.language);
            for cell in &row.cells {
                out.push('\t');
                if let Some(v) = cell {
                    out.push_str(&format_signed_fixed2(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `model - baseline` for every (dataset, language) key.
pub fn improvement_matrix(
    baseline: &BTreeMap<(String, String), f64>,
    model: &BTreeMap<(String, String), f64>,
) -> Result<ImprovementMatrix> {
    let flat = |m: &BTreeMap<(String, String), f64>| -> BTreeMap<String, f64> {
        m.iter().map(|((d, l), v)| (format!("{d}/{l}"), *v)).collect()
    };
    check_keys(&flat(baseline), &flat(model))?;

    let datasets: Vec<String> = baseline.keys().map(|(d, _)| d.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut languages: Vec<(String, String)> = Vec::new();
    for lang in baseline.keys().map(|(_, l)| l.as_str()).collect::<BTreeSet<_>>() {
        languages.push((family_of(lang)?.to_string(), lang.to_string()));
    }
    languages.sort();

    let rows = languages
        .into_iter()
        .map(|(family, language)| {
            let cells = datasets
                .iter()
                .map(|d| {
                    let key = (d.clone(), language.clone());
                    baseline.get(&key).map(|b| model[&key] - b)
                })
                .collect();
            MatrixRow { language, family, cells }
        })
        .collect();
    Ok(ImprovementMatrix { datasets, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(overall: f64, langs: &[(&str, f64)]) -> ScoreTable {
        ScoreTable {
            overall,
            per_language: langs.iter().map(|(l, v)| (l.to_string(), *v)).collect(),
            per_bucket: BTreeMap::new(),
        }
    }

    fn cells(entries: &[(&str, &str, f64)]) -> BTreeMap<(String, String), f64> {
        entries.iter().map(|(d, l, v)| ((d.to_string(), l.to_string()), *v)).collect()
    }

    #[test]
    fn overall_delta_formats_exactly() {
        let r = pairwise_delta(&ScoreTable::overall(85.09), &ScoreTable::overall(84.85)).unwrap();
        assert_eq!(format_signed_fixed2(r.overall.delta), "+0.24");
        assert!((r.overall.delta - 0.24).abs() < 1e-9);
        let r = pairwise_delta(&ScoreTable::overall(73.75), &ScoreTable::overall(73.00)).unwrap();
        assert_eq!(r.overall.delta, 0.75);
    }

    #[test]
    fn self_comparison_is_zero() {
        let mut t = table(50.0, &[("en", 60.0), ("de", 40.0), ("zh", 30.0)]);
        t.per_bucket.insert("cLen/XS".into(), 10.0);
        let r = pairwise_delta(&t, &t).unwrap();
        assert_eq!(r.overall.delta, 0.0);
        assert!(r.per_language.values().chain(r.per_bucket.values()).all(|d| d.delta == 0.0));
        assert_eq!((r.max_positive.delta, r.max_negative.delta), (0.0, 0.0));
        assert!(r.max_positive.key.is_none());
        assert!(r.per_family.values().all(|d| *d == 0.0));
    }

    #[test]
    fn extremes_and_families() {
        let a = table(50.0, &[("en", 60.0), ("de", 40.0), ("zh", 30.0)]);
        let b = table(49.0, &[("en", 55.0), ("de", 43.0), ("zh", 29.0)]);
        let r = pairwise_delta(&a, &b).unwrap();
        assert_eq!(r.max_positive, Extreme { key: Some("language:en".into()), delta: 5.0 });
        assert_eq!(r.max_negative, Extreme { key: Some("language:de".into()), delta: -3.0 });
        assert_eq!(r.per_family["IE: Germanic"], 1.0);
        assert_eq!(r.per_family["Sino-Tibetan"], 1.0);
        for d in r.per_language.values().filter(|d| d.delta > 0.0) {
            assert!(r.max_positive.delta >= d.delta);
        }
    }

    #[test]
    fn key_mismatch_lists_symmetric_difference() {
        let a = table(0.0, &[("en", 1.0), ("de", 1.0)]);
        let b = table(0.0, &[("en", 1.0), ("fr", 1.0)]);
        match pairwise_delta(&a, &b) {
            Err(Error::KeyMismatch { only_first, only_second }) => {
                assert_eq!(only_first, ["de"]);
                assert_eq!(only_second, ["fr"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_single_cell_and_identity() {
        let m = improvement_matrix(&cells(&[("XNLI", "de", 60.0)]), &cells(&[("XNLI", "de", 62.0)])).unwrap();
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].cells, [Some(2.0)]);
        assert_eq!(m.to_tsv(), "family\tlanguage\tXNLI\nIE: Germanic\tde\t+2.00\n");
        let base = cells(&[("XNLI", "de", 60.0), ("MLQA", "zh", 10.0)]);
        let z = improvement_matrix(&base, &base).unwrap();
        assert!(z.rows.iter().flat_map(|r| r.cells.iter().flatten()).all(|v| *v == 0.0));
        assert_eq!(z.get("XNLI", "zh"), None);
    }

    #[test]
    fn matrix_rows_grouped_by_family() {
        let base = cells(&[("A", "zh", 1.0), ("A", "en", 1.0), ("A", "de", 1.0), ("A", "hi", 1.0)]);
        let m = improvement_matrix(&base, &base).unwrap();
        let order: Vec<&str> = m.rows.iter().map(|r| r.language.as_str()).collect();
        assert_eq!(order, ["de", "en", "hi", "zh"]);
        let mut other = base.clone();
        other.remove(&("A".to_string(), "hi".to_string()));
        assert!(matches!(improvement_matrix(&base, &other), Err(Error::KeyMismatch { .. })));
    }
}
