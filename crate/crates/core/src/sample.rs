use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    QaExtractive,
    SentencePair,
    TopicCls,
    SentimentCls,
    Ner,
    Summarization,
}

/// How a task is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    F1Em,
    Accuracy,
    None,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::QaExtractive,
        TaskKind::SentencePair,
        TaskKind::TopicCls,
        TaskKind::SentimentCls,
        TaskKind::Ner,
        TaskKind::Summarization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::QaExtractive => "qa_extractive",
            TaskKind::SentencePair => "sentence_pair",
            TaskKind::TopicCls => "topic_cls",
            TaskKind::SentimentCls => "sentiment_cls",
            TaskKind::Ner => "ner",
            TaskKind::Summarization => "summarization",
        }
    }

    pub fn parse(s: &str) -> Option<TaskKind> {
        TaskKind::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Schema of the task. `answers` and `label` are carried by
    /// [`Sample::golds`]; every other name is a key of [`Sample::fields`].
    pub fn required_fields(self) -> &'static [&'static str] {
        match self {
            TaskKind::QaExtractive => &["question", "context", "answers"],
            TaskKind::SentencePair => &["t1", "t2", "label"],
            TaskKind::TopicCls | TaskKind::SentimentCls => &["t1", "label"],
            TaskKind::Ner => &["tokens", "tags"],
            TaskKind::Summarization => &["document", "summary"],
        }
    }

    pub fn metric(self) -> MetricKind {
        match self {
            TaskKind::QaExtractive => MetricKind::F1Em,
            TaskKind::SentencePair | TaskKind::TopicCls | TaskKind::SentimentCls => MetricKind::Accuracy,
            TaskKind::Ner | TaskKind::Summarization => MetricKind::None,
        }
    }

    pub fn is_classification(self) -> bool {
        self.metric() == MetricKind::Accuracy
    }

    pub fn is_evaluable(self) -> bool {
        self.metric() != MetricKind::None
    }

    /// Task kind of a known dataset name (case-insensitive).
    pub fn for_dataset(name: &str) -> Option<TaskKind> {
        let key = name.to_ascii_lowercase().replace(['-', '_', ' ', '.'], "");
        let kind = match key.as_str() {
            "xquad" | "tydiqa" | "tydiqagoldp" | "mlqa" | "squad" | "squad20" | "quoref" | "newsqa" | "ropes"
            | "mctest" | "socialiqa" => TaskKind::QaExtractive,
            "xnli" | "pawsx" | "quora" | "rte" | "snli" => TaskKind::SentencePair,
            "mldoc" | "dbpedia2014" | "dbpedia" | "agnews" | "yatc" => TaskKind::TopicCls,
            "marc" | "imdb" | "sst2" | "arp" => TaskKind::SentimentCls,
            "wikiann" | "panx" => TaskKind::Ner,
            "xlsum" => TaskKind::Summarization,
            _ => return None,
        };
        Some(kind)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One task instance, in the sample interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    #[serde(rename = "lang")]
    pub language: String,
    pub dataset: String,
    pub task: TaskKind,
    pub fields: BTreeMap<String, String>,
    pub golds: Vec<String>,
}

/// Why a sample does not satisfy its task schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaIssue {
    MissingField(&'static str),
    NoAnswer,
    BadLabel,
}

impl Sample {
    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields.get(name).map(String::as_str)
    }

    /// The single class label of a classification sample.
    pub fn label(&self) -> Option<&str> {
        match self.golds.as_slice() {
            [label] => Some(label),
            _ => None,
        }
    }

    pub fn check_schema(&self) -> Result<(), SchemaIssue> {
        for &name in self.task.required_fields() {
            match name {
                "answers" => {
                    if self.golds.is_empty() || self.golds.iter().all(|g| g.trim().is_empty()) {
                        return Err(SchemaIssue::NoAnswer);
                    }
                }
                "label" => match self.label() {
                    Some(l) if !l.is_empty() => {}
                    _ => return Err(SchemaIssue::BadLabel),
                },
                _ => {
                    if !self.fields.contains_key(name) {
                        return Err(SchemaIssue::MissingField(name));
                    }
                }
            }
        }
        Ok(())
    }
}
