use std::fmt;

use crate::error::{Error, Result};

/// Named slot in a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placeholder {
    Question,
    Context,
    Text1,
    Text2,
    /// Answer string (answer side only).
    Answer,
    /// Verbalized class label (answer side only).
    Label,
}

impl Placeholder {
    pub const ALL: [Placeholder; 6] = [
        Placeholder::Question,
        Placeholder::Context,
        Placeholder::Text1,
        Placeholder::Text2,
        Placeholder::Answer,
        Placeholder::Label,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Placeholder::Question => "Q",
            Placeholder::Context => "C",
            Placeholder::Text1 => "T1",
            Placeholder::Text2 => "T2",
            Placeholder::Answer => "A",
            Placeholder::Label => "LABEL",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Placeholder::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Slot(Placeholder),
}

/// Parsed template text: alternating literal and placeholder segments.
///
/// `Display` prints the exact source the text was parsed from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemplateText {
    segments: Vec<Segment>,
}

impl TemplateText {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn placeholders(&self) -> impl Iterator<Item = Placeholder> + '_ {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(p) => Some(*p),
            Segment::Literal(_) => None,
        })
    }

    pub fn literal_text(&self) -> String {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Literal(l) => Some(l.as_str()),
                Segment::Slot(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for TemplateText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seg in &self.segments {
            match seg {
                Segment::Literal(text) => f.write_str(text)?,
                Segment::Slot(p) => write!(f, "[{}]", p.name())?,
            }
        }
        Ok(())
    }
}

/// Parses template text.
///
/// `[Q]`, `[C]`, `[T1]`, `[T2]`, `[A]` and `[LABEL]` are placeholders. A `[`
/// followed by a run of uppercase letters and digits and then `]` must name
/// one of them. A known name that is not closed by `]` (`[Q`, `[Q-zh]`) is an
/// unterminated placeholder. Any other `[`, and every `|`, is literal text.
pub fn parse_template(source: &str) -> Result<TemplateText> {
    let mut segments = Vec::new();
    let mut literal_start = 0;
    let bytes = source.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'[' {
            i += 1;
            continue;
        }
        let name_start = i + 1;
        let mut j = name_start;
        while j < bytes.len() && (bytes[j].is_ascii_uppercase() || bytes[j].is_ascii_digit()) {
            j += 1;
        }
        let name = &source[name_start..j];
        if name.is_empty() {
            i += 1;
            continue;
        }
        let closed = bytes.get(j) == Some(&b']');
        let placeholder = Placeholder::from_name(name);
        match (closed, placeholder) {
            (true, Some(p)) => {
                if literal_start < i {
                    segments.push(Segment::Literal(source[literal_start..i].to_string()));
                }
                segments.push(Segment::Slot(p));
                i = j + 1;
                literal_start = i;
            }
            (true, None) => {
                return Err(Error::TemplateParse { offset: i, message: format!("unknown placeholder `[{name}]`") })
            }
            (false, Some(_)) => {
                return Err(Error::TemplateParse {
                    offset: i,
                    message: format!("unterminated placeholder `[{name}`"),
                })
            }
            (false, None) if j == bytes.len() => {
                return Err(Error::TemplateParse { offset: i, message: format!("unterminated `[{name}`") })
            }
            (false, None) => i += 1,
        }
    }
    if literal_start < bytes.len() {
        segments.push(Segment::Literal(source[literal_start..].to_string()));
    }
    Ok(TemplateText { segments })
}
