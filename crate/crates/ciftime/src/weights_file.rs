//! Line-delimited JSON weights files.
//!
//! Each non-blank line is one object:
//! `{"id": "...", "frame_ms": 40, "alpha": [...], "logits": [...], "tokens": [...]}`
//! where `logits` and `tokens` are optional.

use std::collections::HashSet;
use std::io::{self, Write};

use ciftime_core::FrameWeights;
use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Parsed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsRecord {
    pub id: String,
    pub frame_ms: f64,
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
}

/// A checked record and the line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsEntry {
    pub line: usize,
    pub weights: FrameWeights,
    pub tokens: Option<Vec<String>>,
}

impl WeightsRecord {
    pub fn from_weights(w: &FrameWeights, tokens: Option<Vec<String>>) -> Self {
        WeightsRecord {
            id: w.utt_id.clone(),
            frame_ms: w.frame_ms,
            alpha: w.alpha.clone(),
            logits: w.logits.clone(),
            tokens,
        }
    }

    pub fn into_weights(self) -> ciftime_core::Result<(FrameWeights, Option<Vec<String>>)> {
        let w = FrameWeights::new(self.id, self.frame_ms, self.alpha, self.logits)?;
        Ok((w, self.tokens))
    }
}

/// Parses a weights file. Bad lines, invalid weights and repeated ids become
/// diagnostics; the remaining records keep their file order.
pub fn parse_weights(text: &str, source: &str) -> Parsed<WeightsEntry> {
    let mut out = Parsed::default();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: WeightsRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(Diagnostic::new(source, format!("malformed record: {e}")).at_line(line_no));
                continue;
            }
        };
        let id = record.id.clone();
        if !seen.insert(id.clone()) {
            out.diagnostics
                .push(Diagnostic::new(source, "duplicate utterance id").at_line(line_no).for_utt(id));
            continue;
        }
        match record.into_weights() {
            Ok((weights, tokens)) => out.items.push(WeightsEntry {
                line: line_no,
                weights,
                tokens,
            }),
            Err(e) => out
                .diagnostics
                .push(Diagnostic::new(source, e.to_string()).at_line(line_no).for_utt(id)),
        }
    }
    out
}

pub fn write_weights<W: Write>(mut out: W, records: &[WeightsRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn weights_to_string(records: &[WeightsRecord]) -> String {
    let mut buf = Vec::new();
    write_weights(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optional_fields_may_be_absent() {
        let p = parse_weights(r#"{"id":"u","frame_ms":40,"alpha":[0.3,0.9]}"#, "w");
        assert!(p.diagnostics.is_empty());
        assert_eq!(p.items[0].weights.alpha, vec![0.3, 0.9]);
        assert_eq!(p.items[0].tokens, None);
    }

    #[test]
    fn bad_lines_are_reported_with_line_numbers() {
        let text = "\n{\"id\":\"a\",\"frame_ms\":40,\"alpha\":[1.0]}\nnot json\n{\"id\":\"b\",\"frame_ms\":40,\"alpha\":[-1.0]}\n{\"id\":\"a\",\"frame_ms\":40,\"alpha\":[1.0]}\n";
        let p = parse_weights(text, "w.jsonl");
        assert_eq!(p.items.len(), 1);
        let lines: Vec<_> = p.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![Some(3), Some(4), Some(5)]);
        assert_eq!(p.diagnostics[1].utt_id.as_deref(), Some("b"));
        assert!(p.diagnostics[2].to_string().contains("duplicate"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let p = parse_weights(r#"{"id":"u","frame_ms":40,"alpha":[1.0],"alhpa":[]}"#, "w");
        assert_eq!(p.diagnostics.len(), 1);
    }
}
