//! Diagnostics with source positions, shared by the lexer, parser and
//! validator.

use std::fmt;

/// One problem found in a program. Lines and columns are 1-based; column 0
/// means "whole line" (used by checks that work on statements, not tokens).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn at_line(line: u32, message: impl Into<String>) -> Self {
        Diagnostic::new(line, 0, message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.col == 0 {
            write!(f, "{}: {}", self.line, self.message)
        } else {
            write!(f, "{}:{}: {}", self.line, self.col, self.message)
        }
    }
}

/// Runtime evaluation fault: division by zero, `getHOL()` on an empty queue,
/// `getCurrQueue()` with no scheduled queue, and similar. Carries the name of
/// the definition being evaluated when one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError {
    pub message: String,
    pub origin: Option<String>,
}

impl EvalError {
    pub fn new(message: impl Into<String>) -> Self {
        EvalError {
            message: message.into(),
            origin: None,
        }
    }

    pub fn in_def(mut self, name: &str) -> Self {
        if self.origin.is_none() {
            self.origin = Some(name.to_string());
        }
        self
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(origin) => write!(f, "in {}: {}", origin, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for EvalError {}
