//! The `.lib` library language.
//!
//! ```text
//! values: a b
//! locations: x = a
//!
//! method get {
//!   r := read x
//!   return r
//! }
//! ```
//!
//! Statements: `skip`, `r := read x`, `r := e`, `write x := e`,
//! `cas x e1 e2 { } else { }`, `if e1 == e2 { } else { }`,
//! `choose { } or { }`, `while (e1 == e2) { }`, `label L:`, `goto L`,
//! `return e`, and `match e { v => { } _ => { } }`. `!=` is accepted
//! wherever `==` is. Expressions are registers, value literals, or `arg`.
//!
//! A `raw method` gives the transition graph directly:
//!
//! ```text
//! raw method m {
//!   init * p0
//!   final a p1
//!   p0 -> p1 : read x a
//! }
//! ```

mod compile;
pub mod parse;

use thiserror::Error;

use crate::library::LibraryIR;

/// Upper bound on the total number of program positions after register
/// expansion.
pub const DEFAULT_POSITION_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },
    #[error("domain overflow: method `{method}` needs more than {limit} program positions")]
    DomainOverflow { method: String, limit: usize },
}

impl DslError {
    /// Source position, when the error has one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            DslError::Syntax { line, col, .. } | DslError::Semantic { line, col, .. } => {
                Some((*line, *col))
            }
            DslError::DomainOverflow { .. } => None,
        }
    }
}

pub fn parse_library(src: &str) -> Result<LibraryIR, DslError> {
    parse_library_with_limit(src, DEFAULT_POSITION_LIMIT)
}

pub fn parse_library_with_limit(src: &str, limit: usize) -> Result<LibraryIR, DslError> {
    let file = parse::parse(src)?;
    compile::compile(&file, limit)
}
