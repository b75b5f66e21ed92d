use std::collections::HashMap;

use super::normalize::normalize_tokens;
use crate::error::{Error, Result};
use crate::language::LanguageRegistry;

/// Bag-of-tokens F1 between two token sequences.
pub fn token_f1<S: AsRef<str>>(pred: &[S], gold: &[S]) -> f64 {
    if pred.is_empty() || gold.is_empty() {
        return if pred.is_empty() && gold.is_empty() { 1.0 } else { 0.0 };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in gold {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let mut common = 0usize;
    for t in pred {
        if let Some(c) = counts.get_mut(t.as_ref()) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pred.len() as f64;
    let recall = common as f64 / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Maximum token F1 of `pred` against any gold answer.
pub fn f1_score<S: AsRef<str>>(pred: &str, golds: &[S], lang: &str) -> Result<f64> {
    if golds.is_empty() {
        return Err(Error::EmptyGolds);
    }
    let language = LanguageRegistry::builtin().lookup(lang)?;
    let pred = normalize_tokens(pred, language);
    Ok(golds
        .iter()
        .map(|g| token_f1(&pred, &normalize_tokens(g.as_ref(), language)))
        .fold(0.0, f64::max))
}

/// 1.0 when the normalized prediction equals some normalized gold, else 0.0.
pub fn exact_match<S: AsRef<str>>(pred: &str, golds: &[S], lang: &str) -> Result<f64> {
    if golds.is_empty() {
        return Err(Error::EmptyGolds);
    }
    let language = LanguageRegistry::builtin().lookup(lang)?;
    let pred = normalize_tokens(pred, language);
    let hit = golds.iter().any(|g| normalize_tokens(g.as_ref(), language) == pred);
    Ok(if hit { 1.0 } else { 0.0 })
}

/// Fraction of (decoded, gold) pairs whose labels are equal.
pub fn accuracy<A: AsRef<str>, B: AsRef<str>>(pairs: &[(A, B)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("accuracy input"));
    }
    let correct = pairs.iter().filter(|(p, g)| p.as_ref() == g.as_ref()).count();
    Ok(correct as f64 / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f1_examples() {
        assert_eq!(f1_score("Ann wrote it", &["Ann wrote it"], "en").unwrap(), 1.0);
        assert_eq!(f1_score("cat", &["dog"], "en").unwrap(), 0.0);
        // P = 2/2, R = 2/4
        let f = f1_score("北京", &["北京大学"], "zh").unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert!((f - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn f1_empty_cases() {
        assert_eq!(f1_score("", &["the"], "en").unwrap(), 1.0);
        assert_eq!(f1_score("", &["cat"], "en").unwrap(), 0.0);
        assert_eq!(f1_score("cat", &["!!"], "en").unwrap(), 0.0);
        assert!(matches!(f1_score::<&str>("cat", &[], "en"), Err(Error::EmptyGolds)));
    }

    #[test]
    fn f1_takes_best_gold() {
        assert_eq!(f1_score("Paris", &["London", "paris."], "en").unwrap(), 1.0);
    }

    #[test]
    fn repeated_tokens_count_once_each() {
        // pred "a a b" (de keeps "a"): common with "a b" is 2 → P=2/3, R=1
        let f = f1_score("a a b", &["a b"], "de").unwrap();
        assert!((f - 0.8).abs() < 1e-12);
    }

    #[test]
    fn em_examples() {
        assert_eq!(exact_match("The answer", &["answer"], "en").unwrap(), 1.0);
        assert_eq!(exact_match("answer", &["answer"], "en").unwrap(), 1.0);
        assert_eq!(exact_match("answers", &["answer"], "en").unwrap(), 0.0);
        assert_eq!(exact_match("北京 大学", &["北京大学"], "zh").unwrap(), 1.0);
        assert!(exact_match::<&str>("x", &[], "en").is_err());
    }

    #[test]
    fn accuracy_examples() {
        let all = [("a", "a"), ("b", "b"), ("c", "c"), ("d", "d")];
        assert_eq!(accuracy(&all).unwrap(), 1.0);
        assert_eq!(accuracy(&[("a", "a"), ("a", "b")]).unwrap(), 0.5);
        assert!(accuracy::<&str, &str>(&[]).is_err());
    }

    proptest! {
        #[test]
        fn bounds_and_symmetry(p in "[a-e ]{0,12}", g in "[a-e ]{0,12}") {
            let f = f1_score(&p, &[&g], "de").unwrap();
            let em = exact_match(&p, &[&g], "de").unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert_eq!(f, f1_score(&g, &[&p], "de").unwrap());
            prop_assert_eq!(em, exact_match(&g, &[&p], "de").unwrap());
            if em == 1.0 {
                prop_assert_eq!(f, 1.0);
            }
        }

        #[test]
        fn gold_order_irrelevant(p in "[a-d ]{0,8}", golds in proptest::collection::vec("[a-d ]{0,8}", 1..5)) {
            let mut rev = golds.clone();
            rev.reverse();
            prop_assert_eq!(f1_score(&p, &golds, "en").unwrap(), f1_score(&p, &rev, "en").unwrap());
            prop_assert_eq!(exact_match(&p, &golds, "en").unwrap(), exact_match(&p, &rev, "en").unwrap());
        }
    }
}
