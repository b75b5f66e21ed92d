use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};
use crate::language::{Language, LanguageRegistry};
use crate::metrics::{sentence_bleu, surface_tokens, SurfaceToken};
use crate::sample::{Sample, TaskKind};

const BUILTIN_BASIC_WORDS: &str = include_str!("../../data/basic_words_en.txt");

/// Per-sample attributes used to bucket samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "cLen")]
    CLen,
    #[serde(rename = "qLen")]
    QLen,
    #[serde(rename = "aLen")]
    ALen,
    #[serde(rename = "BLUE_AC")]
    BleuAc,
    #[serde(rename = "t1Len")]
    T1Len,
    #[serde(rename = "t2Len")]
    T2Len,
    #[serde(rename = "t1t2Ratio")]
    T1T2Ratio,
    #[serde(rename = "BLUE_t1t2")]
    BleuT1T2,
    #[serde(rename = "t1basic")]
    T1Basic,
    #[serde(rename = "t1eNum")]
    T1ENum,
}

impl Feature {
    pub const ALL: [Feature; 10] = [
        Feature::CLen,
        Feature::QLen,
        Feature::ALen,
        Feature::BleuAc,
        Feature::T1Len,
        Feature::T2Len,
        Feature::T1T2Ratio,
        Feature::BleuT1T2,
        Feature::T1Basic,
        Feature::T1ENum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::CLen => "cLen",
            Feature::QLen => "qLen",
            Feature::ALen => "aLen",
            Feature::BleuAc => "BLUE_AC",
            Feature::T1Len => "t1Len",
            Feature::T2Len => "t2Len",
            Feature::T1T2Ratio => "t1t2Ratio",
            Feature::BleuT1T2 => "BLUE_t1t2",
            Feature::T1Basic => "t1basic",
            Feature::T1ENum => "t1eNum",
        }
    }

    pub fn applies_to(self, task: TaskKind) -> bool {
        match task {
            TaskKind::QaExtractive => matches!(self, Feature::CLen | Feature::QLen | Feature::ALen | Feature::BleuAc),
            TaskKind::SentencePair => {
                matches!(self, Feature::T1Len | Feature::T2Len | Feature::T1T2Ratio | Feature::BleuT1T2)
            }
            TaskKind::TopicCls | TaskKind::SentimentCls => {
                matches!(self, Feature::T1Len | Feature::T1Basic | Feature::T1ENum)
            }
            TaskKind::Ner | TaskKind::Summarization => false,
        }
    }

    pub fn for_task(task: TaskKind) -> Vec<Feature> {
        Feature::ALL.into_iter().filter(|f| f.applies_to(task)).collect()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Feature::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

/// Resources some features need.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    basic_words: HashSet<String>,
    /// Guess entities from capitalization when a sample has no
    /// `entities` annotation.
    pub entity_heuristic: bool,
}

impl Default for FeatureContext {
    fn default() -> Self {
        FeatureContext { basic_words: parse_word_list(BUILTIN_BASIC_WORDS), entity_heuristic: false }
    }
}

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl FeatureContext {
    pub fn with_basic_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        FeatureContext {
            basic_words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
            entity_heuristic: false,
        }
    }

    pub fn load_basic_words(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(FeatureContext { basic_words: parse_word_list(&text), entity_heuristic: false })
    }

    pub fn basic_word_count(&self) -> usize {
        self.basic_words.len()
    }
}

fn text_field<'s>(sample: &'s Sample, name: &str) -> Result<&'s str> {
    sample.field(name).ok_or_else(|| Error::MissingField { sample_id: sample.id.clone(), field: name.to_string() })
}

fn first_answer(sample: &Sample) -> Result<&str> {
    sample
        .golds
        .first()
        .map(String::as_str)
        .ok_or_else(|| Error::MissingField { sample_id: sample.id.clone(), field: "answers".to_string() })
}

fn strip_word(token: &str) -> String {
    token
        .chars()
        .filter(|c| {
            !matches!(
                get_general_category(*c),
                GeneralCategory::ConnectorPunctuation
                    | GeneralCategory::DashPunctuation
                    | GeneralCategory::OpenPunctuation
                    | GeneralCategory::ClosePunctuation
                    | GeneralCategory::InitialPunctuation
                    | GeneralCategory::FinalPunctuation
                    | GeneralCategory::OtherPunctuation
            )
        })
        .collect::<String>()
        .to_lowercase()
}

fn basic_fraction(text: &str, language: &Language, ctx: &FeatureContext) -> f64 {
    let words: Vec<String> =
        surface_tokens(text, language).iter().map(|t| strip_word(t.text)).filter(|w| !w.is_empty()).collect();
    if words.is_empty() {
        return 0.0;
    }
    words.iter().filter(|w| ctx.basic_words.contains(w.as_str())).count() as f64 / words.len() as f64
}

/// Parses `start:end` character spans separated by whitespace or commas.
fn parse_spans(sample: &Sample, raw: &str) -> Result<Vec<(usize, usize)>> {
    raw.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|span| {
            let parsed = span
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                .filter(|(a, b)| a < b);
            parsed.ok_or_else(|| Error::InvalidEntitySpan { sample_id: sample.id.clone(), span: span.to_string() })
        })
        .collect()
}

fn is_latin_capital(c: char) -> bool {
    c.is_uppercase() && (c.is_ascii_alphabetic() || ('\u{00C0}'..='\u{024F}').contains(&c))
}

fn heuristic_entity_flags(tokens: &[SurfaceToken<'_>]) -> Vec<bool> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let sentence_start = i == 0 || tokens[i - 1].text.ends_with(['.', '!', '?']);
            !sentence_start && t.text.chars().next().is_some_and(is_latin_capital)
        })
        .collect()
}

fn entity_fraction(sample: &Sample, language: &Language, ctx: &FeatureContext) -> Result<f64> {
    let text = text_field(sample, "t1")?;
    let tokens = surface_tokens(text, language);
    if tokens.is_empty() {
        return Ok(0.0);
    }
    let flags = match sample.field("entities") {
        Some(raw) => {
            let spans = parse_spans(sample, raw)?;
            tokens.iter().map(|t| spans.iter().any(|&(s, e)| t.start < e && s < t.end)).collect()
        }
        None if ctx.entity_heuristic => heuristic_entity_flags(&tokens),
        None => return Err(Error::MissingEntities { sample_id: sample.id.clone() }),
    };
    Ok(flags.iter().filter(|f| **f).count() as f64 / tokens.len() as f64)
}

/// Value of one feature for one sample.
pub fn compute_feature(sample: &Sample, feature: Feature, ctx: &FeatureContext) -> Result<f64> {
    if !feature.applies_to(sample.task) {
        return Err(Error::InapplicableFeature { feature: feature.name().to_string(), task: sample.task.to_string() });
    }
    let language = LanguageRegistry::builtin().lookup(&sample.language)?;
    let len = |text: &str| surface_tokens(text, language).len() as f64;
    let value = match feature {
        Feature::CLen => len(text_field(sample, "context")?),
        Feature::QLen => len(text_field(sample, "question")?),
        Feature::ALen => len(first_answer(sample)?),
        Feature::BleuAc => sentence_bleu(first_answer(sample)?, text_field(sample, "context")?, &language.code),
        Feature::T1Len => len(text_field(sample, "t1")?),
        Feature::T2Len => len(text_field(sample, "t2")?),
        Feature::T1T2Ratio => {
            let t2 = len(text_field(sample, "t2")?);
            if t2 == 0.0 {
                return Err(Error::DegenerateRatio { sample_id: sample.id.clone() });
            }
            len(text_field(sample, "t1")?) / t2
        }
        Feature::BleuT1T2 => {
            sentence_bleu(text_field(sample, "t1")?, text_field(sample, "t2")?, &language.code)
        }
        Feature::T1Basic => basic_fraction(text_field(sample, "t1")?, language, ctx),
        Feature::T1ENum => entity_fraction(sample, language, ctx)?,
    };
    Ok(value)
}

/// Mean feature value over a test set.
pub fn dataset_feature(samples: &[Sample], feature: Feature, ctx: &FeatureContext) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("test set"));
    }
    let mut sum = 0.0;
    for s in samples {
        sum += compute_feature(s, feature, ctx)?;
    }
    Ok(sum / samples.len() as f64)
}

/// [`dataset_feature`] computed separately for each language.
pub fn dataset_feature_by_language(
    samples: &[Sample],
    feature: Feature,
    ctx: &FeatureContext,
) -> Result<BTreeMap<String, f64>> {
    let mut groups: BTreeMap<&str, Vec<Sample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.language.as_str()).or_default().push(s.clone());
    }
    groups.into_iter().map(|(lang, group)| Ok((lang.to_string(), dataset_feature(&group, feature, ctx)?))).collect()
}
