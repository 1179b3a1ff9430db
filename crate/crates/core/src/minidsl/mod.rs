//! Line-oriented structural-modeling command language.
//!
//! One command per line, `#` starts a comment, string literals are double
//! quoted with no escape sequences. The command names mirror the
//! OpenSeesPy API so that tier coverage has the same meaning as it does for
//! generated Python scripts.

mod analysis;
mod parse;
mod vocab;

pub use analysis::{count_undefined, extract_api_set, static_report, tier_coverage, StaticReport};
pub use parse::{parse, parse_recovering, parse_with, ParseFailure, ParseMode};
pub use vocab::{is_registered, ApiTiers, TierError, TierLists, PRINT_COMMAND, VOCABULARY};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A typed literal argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Literal {
    Int(i64),
    Real(f64),
    Ident(String),
    Str(String),
}

impl Literal {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Literal::Int(v) => Some(*v as f64),
            Literal::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Literal::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Literal::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Literal::Int(_) | Literal::Real(_))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            // Debug keeps a decimal point or exponent so the token re-lexes as a real.
            Literal::Real(v) => write!(f, "{v:?}"),
            Literal::Ident(s) => f.write_str(s),
            Literal::Str(s) => write!(f, "\"{s}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub name: String,
    pub args: Vec<Literal>,
    /// 1-based source line.
    pub line: usize,
}

impl Command {
    pub fn to_source(&self) -> String {
        let mut out = self.name.clone();
        for arg in &self.args {
            out.push(' ');
            out.push_str(&arg.to_string());
        }
        out
    }
}

/// Namespaces of the integer tags a program defines and references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagKind {
    Node,
    Element,
    Material,
    Transform,
    Pattern,
    Series,
}

impl TagKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Node => "node",
            TagKind::Element => "element",
            TagKind::Material => "material",
            TagKind::Transform => "transform",
            TagKind::Pattern => "pattern",
            TagKind::Series => "series",
        }
    }
}

/// A tag in its namespace, e.g. `node:11`. This is the DSL's notion of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagRef {
    pub kind: TagKind,
    pub tag: i64,
}

impl fmt::Display for TagRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.as_str(), self.tag)
    }
}

impl Serialize for TagRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    UnknownCommand { line: usize, name: String },
}

impl Diagnostic {
    pub fn line(&self) -> usize {
        match self {
            Diagnostic::UnknownCommand { line, .. } => *line,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownCommand { line, name } => {
                write!(f, "line {line}: unknown command '{name}'")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Program {
    pub raw_text: String,
    pub commands: Vec<Command>,
    /// Number of source lines, blanks and comments included.
    pub total_lines: usize,
    /// First defining line of every tag.
    pub var_defs: BTreeMap<TagRef, usize>,
    pub var_uses: Vec<(TagRef, usize)>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Program {
    /// Re-serializes the command list, keeping every command on its original line.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        let mut current = 1;
        for cmd in &self.commands {
            while current < cmd.line {
                out.push('\n');
                current += 1;
            }
            out.push_str(&cmd.to_source());
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }
}

/// Number of newline-delimited lines; a trailing newline does not open a new line.
pub fn count_lines(source: &str) -> usize {
    source.lines().count()
}
