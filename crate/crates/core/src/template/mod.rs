//! Prompt templates: DSL parsing, registry files, regime-based selection,
//! compilation into encoder/decoder pairs and decoding of model output.

mod decode;
mod parse;
mod render;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::LanguageRegistry;
use crate::metrics::normalize_tokens;
use crate::sample::TaskKind;

pub use decode::{decode_prediction, Decoded, MatchStage};
pub use parse::{parse_template, Placeholder, Segment, TemplateText};
pub use render::{compile, compile_iter, oversized, render, PromptedPair, DEFAULT_CHAR_BUDGET};

const BUILTIN_ENGLISH: &str = include_str!("../../data/templates_en.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Uniformity {
    /// One template per dataset sharing structure and wording across tasks.
    Unified,
    /// Diversified group 1..=5.
    Diversified(u8),
}

impl fmt::Display for Uniformity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Uniformity::Unified => f.write_str("unified"),
            Uniformity::Diversified(k) => write!(f, "diversified-v{k}"),
        }
    }
}

impl FromStr for Uniformity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "unified" {
            return Ok(Uniformity::Unified);
        }
        let group = s
            .strip_prefix("diversified-v")
            .and_then(|k| k.parse::<u8>().ok())
            .filter(|k| (1..=5).contains(k))
            .ok_or_else(|| format!("unknown uniformity `{s}` (expected unified or diversified-v1..v5)"))?;
        Ok(Uniformity::Diversified(group))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LanguagePolicy {
    /// Template always in English.
    Cross,
    /// Template in the evaluated language.
    In,
}

impl fmt::Display for LanguagePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LanguagePolicy::Cross => "cross",
            LanguagePolicy::In => "in",
        })
    }
}

/// A prompt regime: uniformity × language policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Regime {
    pub uniformity: Uniformity,
    pub policy: LanguagePolicy,
}

impl Regime {
    pub fn all() -> Vec<Regime> {
        let mut out = Vec::new();
        for policy in [LanguagePolicy::Cross, LanguagePolicy::In] {
            out.push(Regime { uniformity: Uniformity::Unified, policy });
            for k in 1..=5 {
                out.push(Regime { uniformity: Uniformity::Diversified(k), policy });
            }
        }
        out
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.uniformity, self.policy)
    }
}

impl FromStr for Regime {
    type Err = String;

    /// Accepts `<uniformity><sep><policy>` with `-`, `:`, `x` or `/` as the
    /// separator, e.g. `unified-cross`, `diversified-v3xin`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (head, policy) = if let Some(h) = s.strip_suffix("cross") {
            (h, LanguagePolicy::Cross)
        } else if let Some(h) = s.strip_suffix("in") {
            (h, LanguagePolicy::In)
        } else {
            return Err(format!("regime `{s}` must end in `cross` or `in`"));
        };
        let uniformity = head
            .strip_suffix(['-', ':', 'x', '/'])
            .ok_or_else(|| format!("regime `{s}` lacks a separator before the language policy"))?;
        Ok(Regime { uniformity: uniformity.parse()?, policy })
    }
}

/// Ordered label → option-text mapping for classification templates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verbalizer {
    entries: Vec<(String, String)>,
}

impl Verbalizer {
    pub fn new(entries: Vec<(String, String)>) -> Self {
        Verbalizer { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn option_for(&self, label: &str) -> Option<&str> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, o)| o.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(l, o)| (l.as_str(), o.as_str()))
    }
}

/// A parsed prompt recipe for one dataset, language and uniformity group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub dataset: String,
    pub task: TaskKind,
    pub lang: String,
    pub uniformity: Uniformity,
    pub prompt: TemplateText,
    pub answer: TemplateText,
    pub verbalizer: Verbalizer,
}

fn legal_prompt_slots(task: TaskKind) -> &'static [Placeholder] {
    match task {
        TaskKind::QaExtractive => &[Placeholder::Question, Placeholder::Context],
        TaskKind::SentencePair => &[Placeholder::Text1, Placeholder::Text2],
        TaskKind::TopicCls | TaskKind::SentimentCls | TaskKind::Ner | TaskKind::Summarization => {
            &[Placeholder::Text1]
        }
    }
}

impl Template {
    /// Checks placeholder legality and verbalizer consistency.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidTemplate { id: self.id.clone(), message };
        let language = LanguageRegistry::builtin().lookup(&self.lang)?;
        let legal = legal_prompt_slots(self.task);
        if let Some(p) = self.prompt.placeholders().find(|p| !legal.contains(p)) {
            return Err(invalid(format!("placeholder [{}] is not legal for {}", p.name(), self.task)));
        }
        let answer_slot = if self.task.is_classification() { Placeholder::Label } else { Placeholder::Answer };
        if let Some(p) = self.answer.placeholders().find(|p| *p != answer_slot) {
            return Err(invalid(format!("answer placeholder [{}] is not legal for {}", p.name(), self.task)));
        }
        if self.task.is_classification() {
            if self.verbalizer.is_empty() {
                return Err(invalid("classification template needs a verbalizer".into()));
            }
            let mut labels = HashSet::new();
            let mut options = HashSet::new();
            for (label, option) in self.verbalizer.iter() {
                if !labels.insert(label) {
                    return Err(invalid(format!("label `{label}` appears twice in the verbalizer")));
                }
                if !options.insert(normalize_tokens(option, language)) {
                    return Err(invalid(format!("option `{option}` is not distinct after normalization")));
                }
            }
        } else if !self.verbalizer.is_empty() {
            return Err(invalid(format!("{} template must not carry a verbalizer", self.task)));
        }
        Ok(())
    }
}

/// One line of a template registry file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub id: String,
    pub dataset: String,
    pub lang: String,
    /// `unified` or `diversified`.
    pub uniformity: String,
    /// Diversified group, 1..=5; absent for unified templates.
    pub group: Option<u8>,
    pub text: String,
    pub answer_text: String,
    #[serde(default)]
    pub verbalizer: Vec<(String, String)>,
    /// Needed only for datasets the toolkit does not know by name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
}

impl TemplateRecord {
    pub fn into_template(self) -> Result<Template> {
        let invalid = |message: String| Error::InvalidTemplate { id: self.id.clone(), message };
        let task = match self.task.or_else(|| TaskKind::for_dataset(&self.dataset)) {
            Some(t) => t,
            None => return Err(invalid(format!("unknown dataset `{}`; set `task`", self.dataset))),
        };
        let uniformity = match (self.uniformity.as_str(), self.group) {
            ("unified", None) => Uniformity::Unified,
            ("diversified", Some(k)) if (1..=5).contains(&k) => Uniformity::Diversified(k),
            (u, g) => return Err(invalid(format!("bad uniformity/group combination {u}/{g:?}"))),
        };
        let lang = LanguageRegistry::builtin().canonical(&self.lang)?.to_string();
        let template = Template {
            prompt: parse_template(&self.text)?,
            answer: parse_template(&self.answer_text)?,
            verbalizer: Verbalizer::new(self.verbalizer),
            id: self.id,
            dataset: self.dataset,
            task,
            lang,
            uniformity,
        };
        template.validate()?;
        Ok(template)
    }
}

impl From<&Template> for TemplateRecord {
    fn from(t: &Template) -> Self {
        let (uniformity, group) = match t.uniformity {
            Uniformity::Unified => ("unified".to_string(), None),
            Uniformity::Diversified(k) => ("diversified".to_string(), Some(k)),
        };
        TemplateRecord {
            id: t.id.clone(),
            dataset: t.dataset.clone(),
            lang: t.lang.clone(),
            uniformity,
            group,
            text: t.prompt.to_string(),
            answer_text: t.answer.to_string(),
            verbalizer: t.verbalizer.iter().map(|(l, o)| (l.to_string(), o.to_string())).collect(),
            task: if TaskKind::for_dataset(&t.dataset) == Some(t.task) { None } else { Some(t.task) },
        }
    }
}

/// Ordered collection of templates, unique per (dataset, language, uniformity).
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: Vec<Template>,
}

impl TemplateRegistry {
    /// The English templates shipped with the crate: five diversified groups
    /// and one unified template for each of the seven target datasets.
    pub fn builtin_english() -> Self {
        let mut reg = TemplateRegistry::default();
        reg.extend_from_jsonl(BUILTIN_ENGLISH).expect("shipped template registry is valid");
        reg
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut reg = TemplateRegistry::default();
        reg.extend_from_jsonl(text)?;
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }

    pub fn extend_from_jsonl(&mut self, text: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: TemplateRecord = serde_json::from_str(line)
                .map_err(|e| Error::Parse { line: idx + 1, message: e.to_string() })?;
            self.push(record.into_template()?)?;
        }
        Ok(())
    }

    pub fn push(&mut self, template: Template) -> Result<()> {
        template.validate()?;
        let clash = self.templates.iter().find(|t| {
            t.id == template.id
                || (t.dataset == template.dataset && t.lang == template.lang && t.uniformity == template.uniformity)
        });
        if let Some(existing) = clash {
            return Err(Error::InvalidTemplate {
                id: template.id.clone(),
                message: format!("conflicts with template `{}`", existing.id),
            });
        }
        self.templates.push(template);
        Ok(())
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.templates {
            out.push_str(&serde_json::to_string(&TemplateRecord::from(t)).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Picks one template per requested dataset.
///
/// The cross policy always uses the English template; the in policy uses the
/// template written in `eval_lang`.
pub fn select_templates<'a, S: AsRef<str>>(
    registry: &'a [Template],
    datasets: &[S],
    regime: Regime,
    eval_lang: &str,
) -> Result<BTreeMap<String, &'a Template>> {
    let languages = LanguageRegistry::builtin();
    let lang = match regime.policy {
        LanguagePolicy::Cross => "en",
        LanguagePolicy::In => languages.canonical(eval_lang)?,
    };
    let mut selection = BTreeMap::new();
    for dataset in datasets {
        let dataset = dataset.as_ref();
        let found = registry.iter().find(|t| {
            t.dataset.eq_ignore_ascii_case(dataset) && t.lang == lang && t.uniformity == regime.uniformity
        });
        match found {
            Some(t) => {
                selection.insert(dataset.to_string(), t);
            }
            None => {
                return Err(Error::MissingTemplate {
                    dataset: dataset.to_string(),
                    uniformity: format!("{} ({} policy)", regime.uniformity, regime.policy),
                    lang: lang.to_string(),
                })
            }
        }
    }
    Ok(selection)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DATASETS: [&str; 7] = ["XQuAD", "TyDiQA", "MLQA", "XNLI", "PAWS-X", "MARC", "MLDOC"];

    fn registry_with_zh() -> TemplateRegistry {
        let mut reg = TemplateRegistry::builtin_english();
        reg.extend_from_jsonl(
            r#"{"id":"tydiqa-zh-unified","dataset":"TyDiQA","lang":"zh","uniformity":"unified","group":null,"text":"根据段落的内容回答问题。 | 问题：[Q] | 段落：[C]","answer_text":"[A]","verbalizer":[]}"#,
        )
        .unwrap();
        reg
    }

    #[test]
    fn builtin_has_unified_and_five_groups_per_dataset() {
        let reg = TemplateRegistry::builtin_english();
        assert_eq!(reg.templates().len(), 42);
        for ds in DATASETS {
            for u in std::iter::once(Uniformity::Unified).chain((1..=5).map(Uniformity::Diversified)) {
                assert!(reg.templates().iter().any(|t| t.dataset == ds && t.uniformity == u), "{ds} {u}");
            }
        }
    }

    #[test]
    fn cross_policy_ignores_eval_language() {
        let reg = registry_with_zh();
        let regime = Regime { uniformity: Uniformity::Unified, policy: LanguagePolicy::Cross };
        let sel = select_templates(reg.templates(), &["XNLI"], regime, "zh").unwrap();
        assert_eq!(sel["XNLI"].lang, "en");
        assert_eq!(sel["XNLI"].uniformity, Uniformity::Unified);
    }

    #[test]
    fn in_policy_uses_eval_language() {
        let reg = registry_with_zh();
        let regime = Regime { uniformity: Uniformity::Unified, policy: LanguagePolicy::In };
        let sel = select_templates(reg.templates(), &["TyDiQA"], regime, "zh").unwrap();
        assert!(sel["TyDiQA"].prompt.to_string().starts_with("根据段落的内容回答问题。"));
    }

    #[test]
    fn diversified_group_selection() {
        let reg = TemplateRegistry::builtin_english();
        let regime = Regime { uniformity: Uniformity::Diversified(4), policy: LanguagePolicy::Cross };
        let sel = select_templates(reg.templates(), &["XQuAD"], regime, "de").unwrap();
        assert!(sel["XQuAD"].prompt.to_string().starts_with("I have always wondered:"));
    }

    #[test]
    fn missing_template_names_the_tuple() {
        let reg = TemplateRegistry::builtin_english();
        let regime = Regime { uniformity: Uniformity::Unified, policy: LanguagePolicy::In };
        let err = select_templates(reg.templates(), &["XNLI"], regime, "sw").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("XNLI") && msg.contains("`sw`") && msg.contains("in policy"), "{msg}");
    }

    #[test]
    fn regime_parsing() {
        let r: Regime = "diversified-v3-in".parse().unwrap();
        assert_eq!(r, Regime { uniformity: Uniformity::Diversified(3), policy: LanguagePolicy::In });
        let r: Regime = "unifiedxcross".parse().unwrap();
        assert_eq!(r.uniformity, Uniformity::Unified);
        assert!("unified".parse::<Regime>().is_err());
        assert!("diversified-v6-in".parse::<Regime>().is_err());
        for r in Regime::all() {
            assert_eq!(r.to_string().parse::<Regime>().unwrap(), r);
        }
        assert_eq!(Regime::all().len(), 12);
    }

    #[test]
    fn illegal_placeholders_rejected() {
        let rec = |text: &str, answer: &str, verb: Vec<(String, String)>| TemplateRecord {
            id: "t".into(),
            dataset: "MARC".into(),
            lang: "en".into(),
            uniformity: "unified".into(),
            group: None,
            text: text.into(),
            answer_text: answer.into(),
            verbalizer: verb,
            task: None,
        };
        let verb = vec![("positive".to_string(), "Yes".to_string()), ("negative".to_string(), "No".to_string())];
        assert!(rec("Review: [T1]", "[LABEL]", verb.clone()).into_template().is_ok());
        assert!(rec("Review: [Q]", "[LABEL]", verb.clone()).into_template().is_err());
        assert!(rec("Review: [T1]", "[A]", verb.clone()).into_template().is_err());
        assert!(rec("Review: [T1]", "[LABEL]", vec![]).into_template().is_err());
        let clash = vec![("positive".to_string(), "Yes!".to_string()), ("negative".to_string(), "yes".to_string())];
        assert!(rec("Review: [T1]", "[LABEL]", clash).into_template().is_err());
        let mut qa = rec("[Q] [C]", "[A]", vec![]);
        qa.dataset = "XQuAD".into();
        assert!(qa.clone().into_template().is_ok());
        qa.verbalizer = verb;
        assert!(qa.into_template().is_err());
    }

    #[test]
    fn registry_rejects_duplicates_and_round_trips() {
        let reg = TemplateRegistry::builtin_english();
        let text = reg.to_jsonl();
        assert_eq!(text, BUILTIN_ENGLISH);
        let mut twice = reg.clone();
        assert!(twice.extend_from_jsonl(text.lines().next().unwrap()).is_err());
    }
}
