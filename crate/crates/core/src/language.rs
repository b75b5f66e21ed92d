//! ISO 639-1 language registry.
//!
//! Each entry records whether the language separates words with spaces and
//! the coarse family used to aggregate per-language results. The table ships
//! as `data/languages.tsv` (`code<TAB>space_delimited<TAB>family`) and can be
//! replaced at runtime with [`LanguageRegistry::from_tsv`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const BUILTIN_TABLE: &str = include_str!("../data/languages.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    pub code: String,
    pub space_delimited: bool,
    pub family: String,
}

#[derive(Debug, Clone, Default)]
pub struct LanguageRegistry {
    entries: BTreeMap<String, Language>,
    aliases: BTreeMap<String, String>,
}

impl LanguageRegistry {
    /// The registry compiled into the crate.
    pub fn builtin() -> &'static LanguageRegistry {
        static REGISTRY: OnceLock<LanguageRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            LanguageRegistry::from_tsv(BUILTIN_TABLE).expect("shipped language table is well-formed")
        })
    }

    pub fn from_tsv(table: &str) -> Result<Self> {
        let mut registry = LanguageRegistry::default();
        for (idx, raw) in table.lines().enumerate() {
            let line = idx + 1;
            let bad = |message: String| Error::LanguageTable { line, message };
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 tab-separated columns, found {}", cols.len())));
            }
            if cols[0] == "alias" {
                check_code(cols[1]).map_err(bad)?;
                registry.aliases.insert(cols[1].to_string(), cols[2].to_string());
                continue;
            }
            let code = cols[0];
            check_code(code).map_err(bad)?;
            let space_delimited = match cols[1] {
                "true" => true,
                "false" => false,
                other => return Err(bad(format!("space_delimited must be true or false, got `{other}`"))),
            };
            let family = cols[2].trim();
            if family.is_empty() {
                return Err(bad("empty family label".into()));
            }
            let entry = Language { code: code.to_string(), space_delimited, family: family.to_string() };
            if registry.entries.insert(code.to_string(), entry).is_some() {
                return Err(bad(format!("duplicate code `{code}`")));
            }
        }
        for (from, to) in &registry.aliases {
            if !registry.entries.contains_key(to) {
                return Err(Error::LanguageTable {
                    line: 0,
                    message: format!("alias `{from}` points at unknown code `{to}`"),
                });
            }
        }
        Ok(registry)
    }

    /// Resolves aliases (e.g. `np` → `ne`) to the registered code.
    pub fn canonical<'a>(&'a self, code: &'a str) -> Result<&'a str> {
        if let Some((key, _)) = self.entries.get_key_value(code) {
            return Ok(key);
        }
        match self.aliases.get(code) {
            Some(target) => Ok(target),
            None => Err(Error::UnknownLanguage(code.to_string())),
        }
    }

    pub fn lookup(&self, code: &str) -> Result<&Language> {
        let canonical = self.canonical(code)?;
        Ok(&self.entries[canonical])
    }

    pub fn family_of(&self, code: &str) -> Result<&str> {
        self.lookup(code).map(|l| l.family.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Language> {
        self.entries.values()
    }

    pub fn aliases(&self) -> impl Iterator<Item = (&str, &str)> {
        self.aliases.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

fn check_code(code: &str) -> std::result::Result<(), String> {
    if code.len() == 2 && code.bytes().all(|b| b.is_ascii_lowercase()) {
        Ok(())
    } else {
        Err(format!("`{code}` is not a two-letter lowercase code"))
    }
}

/// Looks a code up in the built-in registry.
pub fn lookup_language(code: &str) -> Result<&'static Language> {
    LanguageRegistry::builtin().lookup(code)
}

pub fn family_of(code: &str) -> Result<&'static str> {
    LanguageRegistry::builtin().family_of(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTED: &str = "af am ar az bg bn cy de el en es et eu fa fi fr gu ha he hi hu id ig it ja jv ka kk ko ml mr ms my nl np pa pt ru si sw ta te th tl tr ur vi yo zh";

    #[test]
    fn covers_every_listed_code() {
        let codes: Vec<&str> = LISTED.split(' ').collect();
        assert_eq!(codes.len(), 49);
        for code in codes {
            assert!(lookup_language(code).is_ok(), "{code}");
        }
    }

    #[test]
    fn five_languages_without_spaces() {
        let mut closed: Vec<&str> =
            LanguageRegistry::builtin().iter().filter(|l| !l.space_delimited).map(|l| l.code.as_str()).collect();
        closed.sort();
        assert_eq!(closed, ["ja", "km", "te", "th", "zh"]);
    }

    #[test]
    fn named_families() {
        let zh = lookup_language("zh").unwrap();
        assert!(!zh.space_delimited);
        assert_eq!(zh.family, "Sino-Tibetan");
        let en = lookup_language("en").unwrap();
        assert!(en.space_delimited);
        assert_eq!(en.family, "IE: Germanic");
        assert_eq!(lookup_language("hi").unwrap().family, "IE: Indo-Aryan");
        assert_eq!(family_of("de").unwrap(), "IE: Germanic");
        assert_eq!(family_of("sw").unwrap(), "Niger-Congo");
        assert_eq!(family_of("ko").unwrap(), "Koreanic");
    }

    #[test]
    fn np_is_an_alias_for_nepali() {
        let np = lookup_language("np").unwrap();
        assert_eq!(np.code, "ne");
        assert_eq!(LanguageRegistry::builtin().canonical("np").unwrap(), "ne");
    }

    #[test]
    fn family_and_lookup_agree() {
        let reg = LanguageRegistry::builtin();
        for lang in reg.iter() {
            assert_eq!(reg.family_of(&lang.code).unwrap(), lang.family);
        }
    }

    #[test]
    fn required_family_labels_present() {
        let reg = LanguageRegistry::builtin();
        let families: std::collections::BTreeSet<&str> = reg.iter().map(|l| l.family.as_str()).collect();
        for want in [
            "IE: Germanic", "IE: Romance", "IE: Indo-Aryan", "IE: Iranian", "Sino-Tibetan", "Niger-Congo",
            "Afro-Asiatic", "Austronesian", "Japonic", "Koreanic", "Turkic", "Uralic", "Dravidian", "Kra-Dai",
            "Austro-Asiatic", "other",
        ] {
            assert!(families.contains(want), "{want}");
        }
    }

    #[test]
    fn unknown_code_is_named() {
        let err = lookup_language("xx").unwrap_err();
        assert!(err.to_string().contains("`xx`"));
        assert!(family_of("EN").is_err());
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(LanguageRegistry::from_tsv("eng\ttrue\tIE: Germanic\n").is_err());
        assert!(LanguageRegistry::from_tsv("en\tyes\tIE: Germanic\n").is_err());
        assert!(LanguageRegistry::from_tsv("en\ttrue\n").is_err());
        assert!(LanguageRegistry::from_tsv("alias\tnp\tne\n").is_err());
        let reg = LanguageRegistry::from_tsv("# c\nen\ttrue\tIE: Germanic\n").unwrap();
        assert_eq!(reg.len(), 1);
    }
}
