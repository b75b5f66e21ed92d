use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Placeholder, Segment, Template};
use crate::error::{Error, Result};
use crate::sample::{Sample, TaskKind};

/// Encoder texts longer than this many characters are reported by
/// [`oversized`].
pub const DEFAULT_CHAR_BUDGET: usize = 4_000;

/// Encoder/decoder text pair for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptedPair {
    pub sample_id: String,
    pub template_id: String,
    #[serde(rename = "x")]
    pub encoder_text: String,
    #[serde(rename = "y")]
    pub decoder_text: String,
}

fn field_name(slot: Placeholder, task: TaskKind) -> &'static str {
    match (slot, task) {
        (Placeholder::Question, _) => "question",
        (Placeholder::Context, _) => "context",
        (Placeholder::Text1, TaskKind::Summarization) => "document",
        (Placeholder::Text1, TaskKind::Ner) => "tokens",
        (Placeholder::Text1, _) => "t1",
        (Placeholder::Text2, _) => "t2",
        (Placeholder::Answer, TaskKind::Summarization) => "summary",
        (Placeholder::Answer, TaskKind::Ner) => "tags",
        (Placeholder::Answer, _) => "answers",
        (Placeholder::Label, _) => "label",
    }
}

fn field(sample: &Sample, slot: Placeholder) -> Result<&str> {
    let name = field_name(slot, sample.task);
    sample.field(name).ok_or_else(|| Error::MissingField { sample_id: sample.id.clone(), field: name.to_string() })
}

fn answer_value<'s>(template: &'s Template, sample: &'s Sample, slot: Placeholder) -> Result<&'s str> {
    match slot {
        Placeholder::Label => {
            let label = sample.label().ok_or_else(|| Error::MissingField {
                sample_id: sample.id.clone(),
                field: "label".to_string(),
            })?;
            template.verbalizer.option_for(label).ok_or_else(|| Error::UnknownLabel {
                sample_id: sample.id.clone(),
                label: label.to_string(),
                template_id: template.id.clone(),
            })
        }
        Placeholder::Answer if sample.task == TaskKind::QaExtractive => sample
            .golds
            .first()
            .map(String::as_str)
            .ok_or_else(|| Error::MissingField { sample_id: sample.id.clone(), field: "answers".to_string() }),
        _ => field(sample, slot),
    }
}

/// Applies a template to a sample.
///
/// Field text is substituted verbatim. The decoder side takes the first gold
/// answer for QA and the verbalized option for classification.
pub fn render(template: &Template, sample: &Sample) -> Result<PromptedPair> {
    let mut encoder_text = String::new();
    for seg in template.prompt.segments() {
        match seg {
            Segment::Literal(text) => encoder_text.push_str(text),
            Segment::Slot(slot) => encoder_text.push_str(field(sample, *slot)?),
        }
    }
    let mut decoder_text = String::new();
    for seg in template.answer.segments() {
        match seg {
            Segment::Literal(text) => decoder_text.push_str(text),
            Segment::Slot(slot) => decoder_text.push_str(answer_value(template, sample, *slot)?),
        }
    }
    Ok(PromptedPair {
        sample_id: sample.id.clone(),
        template_id: template.id.clone(),
        encoder_text,
        decoder_text,
    })
}

fn template_for<'t>(selection: &BTreeMap<String, &'t Template>, sample: &Sample) -> Result<&'t Template> {
    selection.get(&sample.dataset).copied().ok_or_else(|| Error::MissingTemplate {
        dataset: sample.dataset.clone(),
        uniformity: "selection".to_string(),
        lang: sample.language.clone(),
    })
}

/// Lazily renders a stream of samples, one pair per sample, in order.
pub fn compile_iter<'a, I>(
    samples: I,
    selection: &'a BTreeMap<String, &'a Template>,
) -> impl Iterator<Item = Result<PromptedPair>> + 'a
where
    I: IntoIterator<Item = &'a Sample>,
    I::IntoIter: 'a,
{
    samples.into_iter().map(move |s| template_for(selection, s).and_then(|t| render(t, s)))
}

pub fn compile(samples: &[Sample], selection: &BTreeMap<String, &Template>) -> Result<Vec<PromptedPair>> {
    samples.iter().map(|s| template_for(selection, s).and_then(|t| render(t, s))).collect()
}

/// Pairs whose encoder text exceeds `budget` characters.
pub fn oversized(pairs: &[PromptedPair], budget: usize) -> impl Iterator<Item = &PromptedPair> {
    pairs.iter().filter(move |p| p.encoder_text.chars().count() > budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{parse_template, TemplateRegistry, Uniformity, Verbalizer};

    fn sample(id: &str, dataset: &str, task: TaskKind, fields: &[(&str, &str)], golds: &[&str]) -> Sample {
        Sample {
            id: id.into(),
            language: "en".into(),
            dataset: dataset.into(),
            task,
            fields: fields.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            golds: golds.iter().map(|g| g.to_string()).collect(),
        }
    }

    fn template(id: &str, dataset: &str, task: TaskKind, text: &str, answer: &str, verb: &[(&str, &str)]) -> Template {
        Template {
            id: id.into(),
            dataset: dataset.into(),
            task,
            lang: "en".into(),
            uniformity: Uniformity::Unified,
            prompt: parse_template(text).unwrap(),
            answer: parse_template(answer).unwrap(),
            verbalizer: Verbalizer::new(verb.iter().map(|(l, o)| (l.to_string(), o.to_string())).collect()),
        }
    }

    fn xquad_sample() -> Sample {
        sample(
            "q1",
            "XQuAD",
            TaskKind::QaExtractive,
            &[("question", "Who wrote it?"), ("context", "Ann wrote it.")],
            &["Ann", "Ann Lee"],
        )
    }

    #[test]
    fn xquad_first_template() {
        let reg = TemplateRegistry::builtin_english();
        let t = reg.get("xquad-en-v1").unwrap();
        let pair = render(t, &xquad_sample()).unwrap();
        assert_eq!(
            pair.encoder_text,
            "Answer the question based on the paragraph. | Question: Who wrote it? | Paragraph: Ann wrote it."
        );
        assert_eq!(pair.decoder_text, "Ann");
        assert_eq!(pair.template_id, "xquad-en-v1");
    }

    #[test]
    fn literal_only_template() {
        let t = template("lit", "XQuAD", TaskKind::QaExtractive, "hello", "[A]", &[]);
        assert_eq!(render(&t, &xquad_sample()).unwrap().encoder_text, "hello");
    }

    #[test]
    fn marc_verbalized_label() {
        let t = template(
            "marc",
            "MARC",
            TaskKind::SentimentCls,
            "Review: [T1] | (A) Yes. (B) No.",
            "[LABEL]",
            &[("positive", "(A) Yes."), ("negative", "(B) No.")],
        );
        let s = sample("m1", "MARC", TaskKind::SentimentCls, &[("t1", "Great!")], &["positive"]);
        assert_eq!(render(&t, &s).unwrap().decoder_text, "(A) Yes.");
        let bad = sample("m2", "MARC", TaskKind::SentimentCls, &[("t1", "Meh")], &["neutral"]);
        assert!(matches!(render(&t, &bad), Err(Error::UnknownLabel { .. })));
    }

    #[test]
    fn missing_field() {
        let t = template("t", "XNLI", TaskKind::SentencePair, "[T1] / [T2]", "[LABEL]", &[("entailment", "Yes")]);
        let s = sample("n1", "XNLI", TaskKind::SentencePair, &[("t1", "a")], &["entailment"]);
        match render(&t, &s) {
            Err(Error::MissingField { sample_id, field }) => {
                assert_eq!(sample_id, "n1");
                assert_eq!(field, "t2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn summarization_and_ner_fields() {
        let t = template("s", "XL-Sum", TaskKind::Summarization, "Summarize: [T1]", "[A]", &[]);
        let s = sample("x1", "XL-Sum", TaskKind::Summarization, &[("document", "Long text."), ("summary", "Short.")], &[]);
        let pair = render(&t, &s).unwrap();
        assert_eq!((pair.encoder_text.as_str(), pair.decoder_text.as_str()), ("Summarize: Long text.", "Short."));
        let t = template("n", "PANX", TaskKind::Ner, "Tag: [T1]", "[A]", &[]);
        let s = sample("p1", "PANX", TaskKind::Ner, &[("tokens", "Ann lives"), ("tags", "B-PER O")], &[]);
        assert_eq!(render(&t, &s).unwrap().decoder_text, "B-PER O");
    }

    #[test]
    fn compile_preserves_order_and_reports_missing_dataset() {
        let reg = TemplateRegistry::builtin_english();
        let mut selection = BTreeMap::new();
        selection.insert("XQuAD".to_string(), reg.get("xquad-en-unified").unwrap());
        assert!(compile(&[], &selection).unwrap().is_empty());
        let mut a = xquad_sample();
        let mut b = xquad_sample();
        a.id = "z".into();
        b.id = "a".into();
        let pairs = compile(&[a.clone(), b], &selection).unwrap();
        assert_eq!(pairs.iter().map(|p| p.sample_id.as_str()).collect::<Vec<_>>(), ["z", "a"]);
        let streamed: Vec<_> = compile_iter([&a], &selection).collect::<Result<_>>().unwrap();
        assert_eq!(streamed[0], pairs[0]);
        a.dataset = "MLQA".into();
        assert!(matches!(compile(&[a], &selection), Err(Error::MissingTemplate { .. })));
    }

    #[test]
    fn budget_flags_long_prompts() {
        let t = template("t", "XQuAD", TaskKind::QaExtractive, "[C]", "[A]", &[]);
        let mut s = xquad_sample();
        s.fields.insert("context".into(), "é".repeat(DEFAULT_CHAR_BUDGET + 1));
        let pairs = vec![render(&t, &s).unwrap(), render(&t, &xquad_sample()).unwrap()];
        assert_eq!(oversized(&pairs, DEFAULT_CHAR_BUDGET).count(), 1);
    }

    #[test]
    fn pair_json_keys() {
        let pair = PromptedPair {
            sample_id: "s".into(),
            template_id: "t".into(),
            encoder_text: "x".into(),
            decoder_text: "y".into(),
        };
        assert_eq!(
            serde_json::to_string(&pair).unwrap(),
            r#"{"sample_id":"s","template_id":"t","x":"x","y":"y"}"#
        );
    }
}
