//! CTM timestamp files: `utt_id channel start_sec dur_sec token`.
//!
//! Times are written with three decimals, i.e. on a whole-millisecond grid.
//! Start and end are rounded separately and the duration is their
//! difference, so adjacent entries stay adjacent after writing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ciftime_core::{Label, TimestampTrack, TrackEntry};
use thiserror::Error;

use crate::diag::{Diagnostic, Parsed};

pub const CHANNEL: &str = "1";

#[derive(Debug, Error, PartialEq)]
pub enum CtmError {
    #[error("utterance '{utt_id}': entry '{label}' at {start_ms} ms is shorter than 1 ms")]
    TooShort { utt_id: String, label: String, start_ms: f64 },
    #[error("utterance '{utt_id}': '{text}' cannot be written as a CTM field")]
    BadField { utt_id: String, text: String },
}

fn field_ok(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

fn fmt_ms(ms: i64) -> String {
    format!("{}.{:03}", ms / 1000, ms % 1000)
}

/// CTM rows for one track, in entry order.
pub fn format_track(track: &TimestampTrack) -> Result<String, CtmError> {
    let bad = |text: &str| CtmError::BadField {
        utt_id: track.utt_id.clone(),
        text: text.to_string(),
    };
    if !field_ok(&track.utt_id) {
        return Err(bad(&track.utt_id));
    }
    let mut out = String::new();
    for e in &track.entries {
        let label = e.label.as_str();
        if !field_ok(label) {
            return Err(bad(label));
        }
        let start = e.start_ms.round() as i64;
        let end = e.end_ms.round() as i64;
        if end <= start {
            return Err(CtmError::TooShort {
                utt_id: track.utt_id.clone(),
                label: label.to_string(),
                start_ms: e.start_ms,
            });
        }
        writeln!(out, "{} {CHANNEL} {} {} {label}", track.utt_id, fmt_ms(start), fmt_ms(end - start)).unwrap();
    }
    Ok(out)
}

/// CTM text for several tracks, sorted by utterance id.
pub fn format_ctm<'a, I>(tracks: I) -> Result<String, CtmError>
where
    I: IntoIterator<Item = &'a TimestampTrack>,
{
    let mut sorted: Vec<&TimestampTrack> = tracks.into_iter().collect();
    sorted.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    let mut out = String::new();
    for t in sorted {
        out.push_str(&format_track(t)?);
    }
    Ok(out)
}

fn parse_micros(s: &str) -> Option<i64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then(|| (v * 1e6).round() as i64)
}

struct Row {
    line: usize,
    start_us: i64,
    end_us: i64,
    label: Label,
}

/// Parses CTM text into one track per utterance, ordered by id.
///
/// Blank lines and `;;` comments are skipped and an optional sixth
/// (confidence) column is ignored. Rows of an utterance are sorted by start
/// time; tracks whose entries overlap are reported and dropped.
pub fn parse_ctm(text: &str, source: &str) -> Parsed<TimestampTrack> {
    let mut out = Parsed::default();
    let mut rows: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(";;") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let err = |msg: String| Diagnostic::new(source, msg).at_line(line_no);
        if !(5..=6).contains(&fields.len()) {
            out.diagnostics.push(err(format!("expected 5 fields, found {}", fields.len())));
            continue;
        }
        let (Some(start_us), Some(dur_us)) = (parse_micros(fields[2]), parse_micros(fields[3])) else {
            out.diagnostics.push(err(format!("bad time fields '{} {}'", fields[2], fields[3])));
            continue;
        };
        if start_us < 0 || dur_us <= 0 {
            out.diagnostics
                .push(err(format!("start must be >= 0 and duration > 0, got {} {}", fields[2], fields[3])));
            continue;
        }
        rows.entry(fields[0].to_string()).or_default().push(Row {
            line: line_no,
            start_us,
            end_us: start_us + dur_us,
            label: Label::parse(fields[4]),
        });
    }
    for (utt_id, mut rs) in rows {
        rs.sort_by_key(|r| r.start_us);
        let first_line = rs.iter().map(|r| r.line).min().unwrap_or(0);
        let entries = rs
            .into_iter()
            .map(|r| TrackEntry::new(r.label, r.start_us as f64 / 1000.0, r.end_us as f64 / 1000.0))
            .collect();
        let track = TimestampTrack::new(utt_id.clone(), entries);
        match track.validate() {
            Ok(()) => out.items.push(track),
            Err(e) => out
                .diagnostics
                .push(Diagnostic::new(source, e.to_string()).at_line(first_line).for_utt(utt_id)),
        }
    }
    out
}
