//! The experiment description language.
//!
//! ```text
//! ring d=2 p=2 regular
//! ideal I = (2,0),(0,3)
//! family F = frobenius(I)
//! experiment volmult F e_max=8 tol=1/1000
//! ```

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

use std::fmt;

pub use ast::*;
pub use parser::{parse_spec, parse_spec_bytes};
pub use printer::print_spec;

/// A parse or validation error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
    /// What would have been accepted here; may be empty.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, message: impl Into<String>, expected: &[&str]) -> Diagnostic {
        Diagnostic {
            line,
            col,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}
