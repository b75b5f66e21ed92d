use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown language code `{0}`")]
    UnknownLanguage(String),

    #[error("language table line {line}: {message}")]
    LanguageTable { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("file starts with a byte-order mark")]
    ByteOrderMark,

    #[error("line {line}: sample `{id}` violates the {task} schema: {field}")]
    SchemaViolation { line: usize, id: String, task: String, field: String },

    #[error("line {line}: duplicate sample id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: question `{id}` has no gold answer")]
    UnanswerableQa { line: usize, id: String },

    #[error("dataset `{name}`: {message}")]
    InvalidDescriptor { name: String, message: String },

    #[error("template parse error at byte {offset}: {message}")]
    TemplateParse { offset: usize, message: String },

    #[error("template `{id}`: {message}")]
    InvalidTemplate { id: String, message: String },

    #[error("no template for dataset `{dataset}`, {uniformity}, language `{lang}`")]
    MissingTemplate { dataset: String, uniformity: String, lang: String },

    #[error("sample `{sample_id}` has no field `{field}`")]
    MissingField { sample_id: String, field: String },

    #[error("sample `{sample_id}`: label `{label}` is not in the verbalizer of template `{template_id}`")]
    UnknownLabel { sample_id: String, label: String, template_id: String },

    #[error("gold answer list is empty")]
    EmptyGolds,

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("feature {feature} does not apply to {task}")]
    InapplicableFeature { feature: String, task: String },

    #[error("metric {metric} does not apply to {task}")]
    InapplicableMetric { metric: String, task: String },

    #[error("sample `{sample_id}`: t2 has no tokens, length ratio undefined")]
    DegenerateRatio { sample_id: String },

    #[error("sample `{sample_id}` has no entity annotations")]
    MissingEntities { sample_id: String },

    #[error("sample `{sample_id}`: bad entity span `{span}` (expected start:end)")]
    InvalidEntitySpan { sample_id: String, span: String },

    #[error("{count} prediction(s) do not match any sample: {}", shown.join(", "))]
    UnjoinableIds { count: usize, shown: Vec<String> },

    #[error("key sets differ; only in first: [{}], only in second: [{}]", only_first.join(", "), only_second.join(", "))]
    KeyMismatch { only_first: Vec<String>, only_second: Vec<String> },

    #[error("paired inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures reading or decoding input files, as opposed to
    /// inputs that were readable but semantically invalid.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::ByteOrderMark
                | Error::LanguageTable { .. }
                | Error::UnjoinableIds { .. }
        )
    }
}
