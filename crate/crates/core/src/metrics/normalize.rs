use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::error::Result;
use crate::language::{Language, LanguageRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizeMode {
    /// Whitespace-separated words.
    Word,
    /// One token per non-space character, for languages written without
    /// spaces between words.
    Char,
}

impl TokenizeMode {
    pub fn for_language(lang: &Language) -> Self {
        if lang.space_delimited {
            TokenizeMode::Word
        } else {
            TokenizeMode::Char
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
    pub language: String,
    pub mode: TokenizeMode,
}

const ENGLISH_ARTICLES: [&str; 3] = ["a", "an", "the"];

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// NFC, lowercase, strip punctuation, drop English articles, split.
pub fn normalize_and_tokenize(text: &str, lang: &str) -> Result<TokenizedText> {
    let language = LanguageRegistry::builtin().lookup(lang)?;
    Ok(TokenizedText {
        tokens: normalize_tokens(text, language),
        language: language.code.clone(),
        mode: TokenizeMode::for_language(language),
    })
}

/// Token list of [`normalize_and_tokenize`] for an already resolved language.
pub fn normalize_tokens(text: &str, language: &Language) -> Vec<String> {
    let lowered = text.nfc().collect::<String>().to_lowercase();
    // Recompose: lowercasing and punctuation removal can leave sequences
    // that NFC would merge on a second pass.
    let cleaned: String = lowered.chars().filter(|c| !is_punctuation(*c)).nfc().collect();
    let drop_articles = language.code == "en";
    let words = cleaned.split_whitespace().filter(|w| !(drop_articles && ENGLISH_ARTICLES.contains(w)));
    match TokenizeMode::for_language(language) {
        TokenizeMode::Word => words.map(str::to_string).collect(),
        TokenizeMode::Char => words.flat_map(|w| w.chars()).map(String::from).collect(),
    }
}

/// A token of the raw text, with its character span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceToken<'a> {
    pub text: &'a str,
    /// Half-open range in Unicode scalar values.
    pub start: usize,
    pub end: usize,
}

/// Splits text as written, without any normalization: on whitespace for
/// space-delimited languages, per character otherwise.
pub fn surface_tokens<'a>(text: &'a str, language: &Language) -> Vec<SurfaceToken<'a>> {
    let char_mode = TokenizeMode::for_language(language) == TokenizeMode::Char;
    let mut out = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (ci, (bi, c)) in text.char_indices().enumerate() {
        if c.is_whitespace() {
            if let Some((cs, bs)) = current.take() {
                out.push(SurfaceToken { text: &text[bs..bi], start: cs, end: ci });
            }
        } else if char_mode {
            out.push(SurfaceToken { text: &text[bi..bi + c.len_utf8()], start: ci, end: ci + 1 });
        } else if current.is_none() {
            current = Some((ci, bi));
        }
    }
    if let Some((cs, bs)) = current {
        out.push(SurfaceToken { text: &text[bs..], start: cs, end: text.chars().count() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(text: &str, lang: &str) -> Vec<String> {
        normalize_and_tokenize(text, lang).unwrap().tokens
    }

    #[test]
    fn english_normalization() {
        assert_eq!(toks("The Cat!", "en"), ["cat"]);
        assert_eq!(toks("", "en"), Vec::<String>::new());
        assert_eq!(toks("  An  apple, a day. ", "en"), ["apple", "day"]);
    }

    #[test]
    fn articles_only_dropped_for_english() {
        assert_eq!(toks("the a an", "de"), ["the", "a", "an"]);
    }

    #[test]
    fn char_mode_for_chinese() {
        let t = normalize_and_tokenize("北京大学", "zh").unwrap();
        assert_eq!(t.tokens, ["北", "京", "大", "学"]);
        assert_eq!(t.mode, TokenizeMode::Char);
        assert_eq!(toks("北京，Ab 大学。", "zh"), ["北", "京", "a", "b", "大", "学"]);
    }

    #[test]
    fn unicode_punctuation_and_nfc() {
        assert_eq!(toks("«Bonjour» — ça va ?", "fr"), ["bonjour", "ça", "va"]);
        // "e" + combining acute composes to the same token as precomposed é.
        assert_eq!(toks("cafe\u{301}", "fr"), toks("café", "fr"));
    }

    #[test]
    fn unknown_language() {
        assert!(normalize_and_tokenize("x", "qq").is_err());
    }

    #[test]
    fn surface_spans() {
        let en = LanguageRegistry::builtin().lookup("en").unwrap();
        let t = surface_tokens("Who wrote it ?", en);
        assert_eq!(t.iter().map(|t| t.text).collect::<Vec<_>>(), ["Who", "wrote", "it", "?"]);
        assert_eq!((t[1].start, t[1].end), (4, 9));
        let zh = LanguageRegistry::builtin().lookup("zh").unwrap();
        let t = surface_tokens("北京 大学", zh);
        assert_eq!(t.len(), 4);
        assert_eq!((t[2].start, t[2].end), (3, 4));
    }

    proptest! {
        #[test]
        fn idempotent_in_word_mode(text in "\\PC{0,40}", lang in prop::sample::select(vec!["en", "de", "fr", "ru"])) {
            let once = toks(&text, lang);
            let again = toks(&once.join(" "), lang);
            prop_assert_eq!(once, again);
        }

        #[test]
        fn no_empty_tokens(text in "\\PC{0,40}", lang in prop::sample::select(vec!["en", "zh", "ja"])) {
            prop_assert!(toks(&text, lang).iter().all(|t| !t.is_empty()));
        }
    }
}
