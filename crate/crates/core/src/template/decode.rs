use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Template;
use crate::language::LanguageRegistry;
use crate::metrics::normalize_tokens;

/// Which rule produced a classification decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStage {
    /// Output (trimmed) equals an option verbatim.
    Exact,
    /// Equal after normalization.
    Normalized,
    /// Exactly one option contains, or is contained in, the output.
    Substring,
    /// Largest shared token count; earliest option wins ties.
    Overlap,
    /// Span tasks: output returned stripped.
    Verbatim,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    /// Class label for classification, answer text otherwise.
    pub answer: String,
    pub fallback_used: bool,
    pub stage: MatchStage,
}

fn overlap(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in b {
        *counts.entry(t).or_default() += 1;
    }
    a.iter()
        .filter(|t| match counts.get_mut(t.as_str()) {
            Some(c) if *c > 0 => {
                *c -= 1;
                true
            }
            _ => false,
        })
        .count()
}

/// Maps generated text back to a label (classification) or answer span.
///
/// Never fails: classification always yields some label, with
/// `fallback_used` set whenever the output is not verbatim an option.
pub fn decode_prediction(template: &Template, output_text: &str) -> Decoded {
    let trimmed = output_text.trim();
    if !template.task.is_classification() {
        return Decoded { answer: trimmed.to_string(), fallback_used: false, stage: MatchStage::Verbatim };
    }
    let options: Vec<(&str, &str)> = template.verbalizer.iter().collect();
    let pick = |idx: usize, stage: MatchStage| Decoded {
        answer: options[idx].0.to_string(),
        fallback_used: stage != MatchStage::Exact,
        stage,
    };
    if let Some(idx) = options.iter().position(|(_, o)| *o == trimmed) {
        return pick(idx, MatchStage::Exact);
    }

    // Template languages are validated when the template is built.
    let language = LanguageRegistry::builtin().lookup(&template.lang).expect("template language is registered");
    let out_tokens = normalize_tokens(trimmed, language);
    let option_tokens: Vec<Vec<String>> = options.iter().map(|(_, o)| normalize_tokens(o, language)).collect();
    if let Some(idx) = option_tokens.iter().position(|t| *t == out_tokens) {
        return pick(idx, MatchStage::Normalized);
    }

    let out_joined = out_tokens.join(" ");
    if !out_joined.is_empty() {
        let hits: Vec<usize> = option_tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let opt = t.join(" ");
                !opt.is_empty() && (opt.contains(&out_joined) || out_joined.contains(&opt))
            })
            .map(|(i, _)| i)
            .collect();
        if let [idx] = hits.as_slice() {
            return pick(*idx, MatchStage::Substring);
        }
    }

    let mut best = 0;
    let mut best_score = 0;
    for (i, t) in option_tokens.iter().enumerate() {
        let score = overlap(&out_tokens, t);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    pick(best, MatchStage::Overlap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::TemplateRegistry;

    fn marc() -> Template {
        TemplateRegistry::builtin_english().get("marc-en-unified").unwrap().clone()
    }

    #[test]
    fn exact_option() {
        let d = decode_prediction(&marc(), "(A) Yes.");
        assert_eq!(d.answer, "positive");
        assert!(!d.fallback_used);
        assert_eq!(d.stage, MatchStage::Exact);
        assert!(!decode_prediction(&marc(), "  (B) No.\n").fallback_used);
    }

    #[test]
    fn loose_yes_uses_fallback() {
        // "(A) Yes." normalizes to ["yes"]: punctuation goes, then "a" as an article.
        let d = decode_prediction(&marc(), "yes");
        assert_eq!(d.answer, "positive");
        assert!(d.fallback_used);
    }

    #[test]
    fn substring_and_overlap() {
        let mldoc = TemplateRegistry::builtin_english().get("mldoc-en-v1").unwrap().clone();
        let d = decode_prediction(&mldoc, "government");
        assert_eq!((d.answer.as_str(), d.stage), ("GCAT", MatchStage::Substring));
        // No option contains the whole output; option C shares two tokens.
        let d = decode_prediction(&mldoc, "society and stuff");
        assert_eq!((d.answer.as_str(), d.stage), ("GCAT", MatchStage::Overlap));
        // No overlap at all: first option in verbalizer order.
        let d = decode_prediction(&mldoc, "zzz");
        assert_eq!((d.answer.as_str(), d.stage), ("CCAT", MatchStage::Overlap));
        let d = decode_prediction(&mldoc, "");
        assert_eq!(d.answer, "CCAT");
    }

    #[test]
    fn qa_is_stripped_only() {
        let t = TemplateRegistry::builtin_english().get("xquad-en-v1").unwrap().clone();
        let d = decode_prediction(&t, "  Ann  ");
        assert_eq!(d.answer, "Ann");
        assert!(!d.fallback_used);
    }

    #[test]
    fn decode_inverts_render_for_every_builtin_label() {
        for t in TemplateRegistry::builtin_english().templates().iter().filter(|t| t.task.is_classification()) {
            for (label, option) in t.verbalizer.iter() {
                let d = decode_prediction(t, option);
                assert_eq!(d.answer, label, "{}", t.id);
                assert!(!d.fallback_used);
            }
        }
    }
}
