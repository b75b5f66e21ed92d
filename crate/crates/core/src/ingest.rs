//! Sample file ingestion and per-language subsampling.
//!
//! Files hold one JSON object per LF-terminated line with keys `id`, `lang`,
//! `dataset`, `task`, `fields` and `golds`. Every record is checked against
//! the schema of the dataset's task kind.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::LanguageRegistry;
use crate::sample::{Sample, SchemaIssue, TaskKind};

pub const DEFAULT_TARGET_PER_LANGUAGE: usize = 3_000;
pub const DEFAULT_EXPANDING_PER_DATASET: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Has train, dev and test splits; evaluated.
    Target,
    /// Training data only.
    Expanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetDescriptor {
    pub name: String,
    pub task: TaskKind,
    pub role: Role,
    /// Allowed language codes; empty accepts any registered language.
    pub languages: Vec<String>,
    pub splits: BTreeMap<Split, PathBuf>,
}

impl DatasetDescriptor {
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidDescriptor { name: self.name.clone(), message };
        if self.role == Role::Target {
            let missing: Vec<&str> =
                Split::ALL.iter().filter(|s| !self.splits.contains_key(s)).map(|s| s.as_str()).collect();
            if !missing.is_empty() {
                return Err(invalid(format!("target dataset lacks split(s): {}", missing.join(", "))));
            }
        } else if !self.splits.contains_key(&Split::Train) {
            return Err(invalid("expanding dataset needs a train split".into()));
        }
        let registry = LanguageRegistry::builtin();
        for code in &self.languages {
            registry.lookup(code)?;
        }
        Ok(())
    }

    pub fn default_policy(&self, seed: u64) -> SamplingPolicy {
        let n = match self.role {
            Role::Target => DEFAULT_TARGET_PER_LANGUAGE,
            Role::Expanding => DEFAULT_EXPANDING_PER_DATASET,
        };
        SamplingPolicy { per_language_n: n, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    pub per_language_n: usize,
    pub seed: u64,
}

impl SamplingPolicy {
    pub fn new(per_language_n: usize, seed: u64) -> Result<Self> {
        if per_language_n == 0 {
            return Err(Error::EmptyInput("per-language sample count"));
        }
        Ok(SamplingPolicy { per_language_n, seed })
    }
}

pub fn read_samples(path: &Path, descriptor: &DatasetDescriptor) -> Result<Vec<Sample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_samples(BufReader::new(file), descriptor).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Reads samples from any byte stream; see [`read_samples`].
pub fn parse_samples<R: Read>(reader: R, descriptor: &DatasetDescriptor) -> Result<Vec<Sample>> {
    let mut reader = BufReader::new(reader);
    if reader.fill_buf().map_err(|e| Error::io("<input>", e))?.starts_with(b"\xEF\xBB\xBF") {
        return Err(Error::ByteOrderMark);
    }
    let registry = LanguageRegistry::builtin();
    let allowed: HashSet<&str> = descriptor.languages.iter().map(String::as_str).collect();
    let mut seen = HashSet::new();
    let mut samples = Vec::new();
    let mut buf = Vec::new();
    let mut line = 0;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(|e| Error::io("<input>", e))?;
        if n == 0 {
            break;
        }
        line += 1;
        let parse_err = |message: String| Error::Parse { line, message };
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        if buf.last() == Some(&b'\r') {
            return Err(parse_err("line ends with CR; records must be LF-terminated".into()));
        }
        let text = std::str::from_utf8(&buf).map_err(|e| parse_err(format!("invalid UTF-8: {e}")))?;
        let sample: Sample = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;

        let violation = |field: &str| Error::SchemaViolation {
            line,
            id: sample.id.clone(),
            task: descriptor.task.to_string(),
            field: field.to_string(),
        };
        if sample.task != descriptor.task {
            return Err(violation(&format!("task is {}, dataset expects {}", sample.task, descriptor.task)));
        }
        if registry.lookup(&sample.language).is_err()
            || (!allowed.is_empty() && !allowed.contains(sample.language.as_str()))
        {
            return Err(violation(&format!("language `{}` not accepted", sample.language)));
        }
        match sample.check_schema() {
            Ok(()) => {}
            Err(SchemaIssue::NoAnswer) => return Err(Error::UnanswerableQa { line, id: sample.id }),
            Err(SchemaIssue::MissingField(f)) => return Err(violation(&format!("missing field `{f}`"))),
            Err(SchemaIssue::BadLabel) => return Err(violation("`label` must be exactly one non-empty gold")),
        }
        if !seen.insert(sample.id.clone()) {
            return Err(Error::DuplicateId { line, id: sample.id });
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Writes samples in the interchange format, one record per line.
pub fn write_samples<W: Write>(mut writer: W, samples: &[Sample]) -> std::io::Result<()> {
    for sample in samples {
        serde_json::to_writer(&mut writer, sample)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// SplitMix64 sequence.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Draws `min(per_language_n, available)` samples per language.
///
/// Within a language the candidates are sorted by id, then a partial
/// Fisher-Yates shuffle picks the first `n` positions. Index `i` swaps with
/// `i + next % (len - i)`, where `next` comes from a SplitMix64 stream seeded
/// with `seed ^ fnv1a64(language)`. The result is sorted by (language, id).
pub fn subsample(samples: &[Sample], policy: &SamplingPolicy) -> Vec<Sample> {
    let mut by_language: BTreeMap<&str, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        by_language.entry(s.language.as_str()).or_default().push(s);
    }
    let mut out = Vec::new();
    for (lang, mut group) in by_language {
        group.sort_by(|a, b| a.id.cmp(&b.id));
        let take = policy.per_language_n.min(group.len());
        if take < group.len() {
            let mut rng = SplitMix64::new(policy.seed ^ fnv1a64(lang.as_bytes()));
            for i in 0..take {
                let span = (group.len() - i) as u64;
                let j = i + (rng.next_u64() % span) as usize;
                group.swap(i, j);
            }
            group.truncate(take);
            group.sort_by(|a, b| a.id.cmp(&b.id));
        }
        out.extend(group.into_iter().cloned());
    }
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn make(ids: &[(u8, u16)]) -> Vec<Sample> {
        let langs = ["en", "de", "zh", "ja"];
        let mut seen = HashSet::new();
        ids.iter()
            .filter(|p| seen.insert(**p))
            .map(|&(l, i)| Sample {
                id: format!("{}-{i}", langs[l as usize % 4]),
                language: langs[l as usize % 4].into(),
                dataset: "MARC".into(),
                task: TaskKind::SentimentCls,
                fields: [("t1".to_string(), "x".to_string())].into_iter().collect(),
                golds: vec!["positive".into()],
            })
            .collect()
    }

    proptest! {
        #[test]
        fn idempotent_and_bounded(ids in proptest::collection::vec((0u8..4, 0u16..500), 0..200),
                                  n in 1usize..40, seed in any::<u64>()) {
            let samples = make(&ids);
            let policy = SamplingPolicy::new(n, seed).unwrap();
            let once = subsample(&samples, &policy);
            let twice = subsample(&once, &policy);
            prop_assert_eq!(&once, &twice);
            let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
            for s in &once {
                *tally.entry(s.language.as_str()).or_default() += 1;
            }
            prop_assert!(tally.values().all(|&c| c <= n));
        }
    }
}
