//! Source locations and diagnostics shared by every frontend.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 1-based line/column position plus the byte offset it was derived from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Loc {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl Loc {
    pub fn new(line: usize, column: usize, offset: usize) -> Self {
        Loc { line, column, offset }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagKind {
    Lexical,
    Syntax,
    Declaration,
    Type,
    Fbd,
    Requirement,
    Manifest,
}

impl fmt::Display for DiagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiagKind::Lexical => "lexical error",
            DiagKind::Syntax => "syntax error",
            DiagKind::Declaration => "declaration error",
            DiagKind::Type => "type error",
            DiagKind::Fbd => "fbd error",
            DiagKind::Requirement => "requirement error",
            DiagKind::Manifest => "manifest error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub message: String,
    pub loc: Option<Loc>,
    /// Token kinds that would have been accepted, for syntax errors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn new(kind: DiagKind, message: impl Into<String>, loc: Option<Loc>) -> Self {
        Diagnostic { kind, message: message.into(), loc, expected: Vec::new() }
    }

    pub fn at(kind: DiagKind, message: impl Into<String>, loc: Loc) -> Self {
        Self::new(kind, message, Some(loc))
    }

    pub fn with_expected(mut self, expected: Vec<String>) -> Self {
        self.expected = expected;
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(loc) = self.loc {
            write!(f, "{loc}: ")?;
        }
        write!(f, "{}: {}", self.kind, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// A non-empty batch of diagnostics, used as the error type of every
/// frontend operation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn single(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }

    pub fn first(&self) -> &Diagnostic {
        &self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}
