use std::collections::HashMap;

use super::normalize::normalize_tokens;
use crate::language::LanguageRegistry;

const MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_default() += 1;
    }
    counts
}

/// Sentence-level BLEU-4 over normalized tokens.
///
/// Uniform weights, brevity penalty, clipped n-gram precision. Orders 2..=4
/// use add-one smoothing `(matches + 1) / (candidate n-grams + 1)`; the
/// unigram precision is unsmoothed, so no shared unigram gives 0. An unknown
/// language or an empty side also gives 0.
pub fn sentence_bleu(candidate: &str, reference: &str, lang: &str) -> f64 {
    let Ok(language) = LanguageRegistry::builtin().lookup(lang) else {
        return 0.0;
    };
    let cand = normalize_tokens(candidate, language);
    let refr = normalize_tokens(reference, language);
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let cand_counts = ngram_counts(&cand, n);
        let ref_counts = ngram_counts(&refr, n);
        let total = cand.len().saturating_sub(n - 1);
        let matched: usize =
            cand_counts.iter().map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0))).sum();
        let precision = if n == 1 {
            if matched == 0 {
                return 0.0;
            }
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        log_sum += precision.ln() / MAX_ORDER as f64;
    }
    let (c, r) = (cand.len() as f64, refr.len() as f64);
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    brevity * log_sum.exp()
}
