use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A line/column position in script text, both 1-based.
///
/// Positions never take part in AST equality: two scripts that differ only
/// in layout parse to equal trees.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(line: usize, col: usize) -> Self {
        Pos { line, col }
    }
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("{pos}: lexical error: {message}")]
    Lex { pos: Pos, message: String },
    #[error("{pos}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: binding error: {message}")]
    Binding { pos: Pos, message: String },
    #[error("{pos}: parity error: {message}")]
    Parity { pos: Pos, message: String },
    #[error("{pos}: in `{context}`: {message}")]
    Eval {
        pos: Pos,
        context: String,
        message: String,
    },
}

impl ScriptError {
    pub fn pos(&self) -> Pos {
        match self {
            ScriptError::Lex { pos, .. }
            | ScriptError::Syntax { pos, .. }
            | ScriptError::Binding { pos, .. }
            | ScriptError::Parity { pos, .. }
            | ScriptError::Eval { pos, .. } => *pos,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScriptError::Lex { .. } => "lexical",
            ScriptError::Syntax { .. } => "syntax",
            ScriptError::Binding { .. } => "binding",
            ScriptError::Parity { .. } => "parity",
            ScriptError::Eval { .. } => "evaluation",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Script { path: PathBuf, source: ScriptError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: report differs from golden file {golden} at line {line}")]
    Golden {
        path: PathBuf,
        golden: PathBuf,
        line: usize,
    },
    #[error("{path}: golden file {golden} is missing (rerun with --bless to create it)")]
    MissingGolden { path: PathBuf, golden: PathBuf },
}
