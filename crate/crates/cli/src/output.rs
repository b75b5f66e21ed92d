//! Report headers and file emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use serde::Serialize;

use polykit::xeval::BUCKETING_METHOD;

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub regime: String,
    pub bucketing: &'static str,
    /// Command-specific entries, e.g. the model or split.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl Header {
    pub fn new(cfg: &RunConfig) -> Self {
        Header {
            tool: "polykit",
            version: TOOL_VERSION,
            config_hash: cfg.hash(),
            seed: cfg.seed,
            regime: cfg.regime.clone(),
            bucketing: BUCKETING_METHOD,
            notes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.insert(key.to_string(), value.to_string());
        self
    }

    /// `# key: value` lines for TSV files.
    pub fn tsv(&self) -> String {
        let mut out = format!(
            "# tool: {} {}\n# config_hash: {}\n# seed: {}\n# regime: {}\n# bucketing: {}\n",
            self.tool, self.version, self.config_hash, self.seed, self.regime, self.bucketing
        );
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }

    /// First line of JSONL outputs.
    pub fn jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            _header: &'a Header,
        }
        let mut s = serde_json::to_string(&Line { _header: self }).expect("header serializes");
        s.push('\n');
        s
    }
}

/// A JSON report: the header followed by the body's own fields.
pub fn json_document<T: Serialize>(header: &Header, body: &T) -> String {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: &'a Header,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { header, body }).expect("report serializes");
    s.push('\n');
    s
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// File-name form of a dataset or model name: lowercase ASCII letters and
/// digits only.
pub fn file_stem(name: &str) -> String {
    let stem: String = name.chars().filter(char::is_ascii_alphanumeric).map(|c| c.to_ascii_lowercase()).collect();
    if stem.is_empty() {
        "unnamed".to_string()
    } else {
        stem
    }
}

pub fn path_in(dir: &Path, parts: &[&str]) -> PathBuf {
    parts.iter().fold(dir.to_path_buf(), |p, part| p.join(part))
}

/// Bold text for terminal tables, unless `POLYKIT_NO_COLOR` is set or
/// stdout is not a terminal.
pub fn bold(text: &str) -> String {
    if std::env::var_os("POLYKIT_NO_COLOR").is_none() && std::io::stdout().is_terminal() {
        format!("\x1b[1m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_forms() {
        let h = Header::new(&RunConfig::empty()).with("model", "m1");
        let tsv = h.tsv();
        assert!(tsv.starts_with("# tool: polykit "));
        assert!(tsv.contains("# seed: 0\n# regime: unified-cross\n"));
        assert!(tsv.ends_with("# model: m1\n"));
        assert!(h.jsonl().starts_with("{\"_header\":{\"tool\":\"polykit\""));
        let doc = json_document(&h, &serde_json::json!({"x": 1}));
        assert!(doc.starts_with("{\n  \"header\": {"));
    }

    #[test]
    fn stems() {
        assert_eq!(file_stem("PAWS-X"), "pawsx");
        assert_eq!(file_stem("---"), "unnamed");
    }
}
