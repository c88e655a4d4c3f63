//! Per-record problems collected while a command keeps going.

use std::fmt;

/// One problem tied to an input file position and/or an utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub source: String,
    pub line: Option<usize>,
    pub utt_id: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(source: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            source: source.into(),
            line: None,
            utt_id: None,
            message: message.into(),
        }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }

    pub fn for_utt(mut self, utt_id: impl Into<String>) -> Self {
        self.utt_id = Some(utt_id.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(id) = &self.utt_id {
            write!(f, ": utterance '{id}'")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Items parsed from a file together with the lines that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub items: Vec<T>,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed {
            items: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}
