use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hash::StableHasher;

/// Stable 64-bit warning identity, rendered as 16 lowercase hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WarningId(pub u64);

impl WarningId {
    /// FNV-1a 64 over `file, start_line, start_col, end_line, end_col,
    /// analyzer, description`, each field encoded as UTF-8 (integers in
    /// decimal) and terminated by byte 0x1F.
    pub fn compute(
        file: &str,
        span: Span,
        analyzer: &str,
        description: &str,
    ) -> Self {
        let mut h = StableHasher::new();
        h.field_str(file)
            .field_u64(span.start_line.into())
            .field_u64(span.start_col.into())
            .field_u64(span.end_line.into())
            .field_u64(span.end_col.into())
            .field_str(analyzer)
            .field_str(description);
        WarningId(h.finish())
    }
}

impl fmt::Display for WarningId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid warning id {0:?}: expected 16 hex digits")]
pub struct ParseIdError(pub String);

impl FromStr for WarningId {
    type Err = ParseIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 16 {
            return Err(ParseIdError(s.to_string()));
        }
        u64::from_str_radix(s, 16)
            .map(WarningId)
            .map_err(|_| ParseIdError(s.to_string()))
    }
}

impl Serialize for WarningId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WarningId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Error,
    Warning,
    Info,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Error => "Error",
            Level::Warning => "Warning",
            Level::Info => "Info",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Error" => Some(Level::Error),
            "Warning" => Some(Level::Warning),
            "Info" => Some(Level::Info),
            _ => None,
        }
    }
}

/// Ground-truth verdict for a warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "tp")]
    TruePositive,
    #[serde(rename = "fp")]
    FalsePositive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::TruePositive)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::TruePositive => "tp",
            Label::FalsePositive => "fp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tp" => Some(Label::TruePositive),
            "fp" => Some(Label::FalsePositive),
            _ => None,
        }
    }
}

/// 1-based source span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn is_valid(&self) -> bool {
        let coords_ok =
            self.start_line >= 1 && self.start_col >= 1 && self.end_line >= 1 && self.end_col >= 1;
        let ordered = self.start_line < self.end_line
            || (self.start_line == self.end_line && self.start_col <= self.end_col);
        coords_ok && ordered
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }
}

/// One analyzer warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningRecord {
    pub id: WarningId,
    pub level: Level,
    pub analyzer: String,
    pub op_type: Option<String>,
    pub description: String,
    pub file: String,
    #[serde(flatten)]
    pub span: Span,
    pub code_snippet: String,
    #[serde(default)]
    pub label: Option<Label>,
    #[serde(default)]
    pub cluster_id: Option<u32>,
}

impl WarningRecord {
    /// Builds a record and assigns its id. Label and cluster start unset.
    pub fn new(
        level: Level,
        analyzer: impl Into<String>,
        op_type: Option<String>,
        description: impl Into<String>,
        file: impl Into<String>,
        span: Span,
        code_snippet: impl Into<String>,
    ) -> Self {
        let analyzer = analyzer.into();
        let description = description.into();
        let file = file.into();
        let id = WarningId::compute(&file, span, &analyzer, &description);
        Self {
            id,
            level,
            analyzer,
            op_type,
            description,
            file,
            span,
            code_snippet: code_snippet.into(),
            label: None,
            cluster_id: None,
        }
    }

    /// Package directory the file lives in, with a trailing `-x.y.z` version stripped.
    ///
    /// `"aarc-0.3.2/src/smart_ptrs.rs"` → `"aarc"`.
    pub fn package_name(&self) -> &str {
        let first = self.file.split('/').next().unwrap_or("");
        match first.rfind('-') {
            Some(pos)
                if first[pos + 1..]
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_digit()) =>
            {
                &first[..pos]
            }
            _ => first,
        }
    }
}
