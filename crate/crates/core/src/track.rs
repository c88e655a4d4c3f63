//! Token interval tracks shared by post-processing and scoring.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Label text used for silence when a track is flattened to strings.
pub const SILENCE_LABEL: &str = "<sil>";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    Token(String),
    Silence,
}

impl Label {
    pub fn token(s: impl Into<String>) -> Self {
        Label::Token(s.into())
    }

    /// Parses `<sil>` as silence and anything else as a token.
    pub fn parse(s: &str) -> Self {
        if s == SILENCE_LABEL {
            Label::Silence
        } else {
            Label::Token(s.into())
        }
    }

    pub fn is_silence(&self) -> bool {
        matches!(self, Label::Silence)
    }

    pub fn as_str(&self) -> &str {
        match self {
            Label::Token(s) => s,
            Label::Silence => SILENCE_LABEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackEntry {
    pub label: Label,
    pub start_ms: f64,
    pub end_ms: f64,
}

impl TrackEntry {
    pub fn new(label: Label, start_ms: f64, end_ms: f64) -> Self {
        TrackEntry { label, start_ms, end_ms }
    }

    pub fn token(label: impl Into<String>, start_ms: f64, end_ms: f64) -> Self {
        TrackEntry::new(Label::Token(label.into()), start_ms, end_ms)
    }

    pub fn silence(start_ms: f64, end_ms: f64) -> Self {
        TrackEntry::new(Label::Silence, start_ms, end_ms)
    }

    pub fn duration_ms(&self) -> f64 {
        self.end_ms - self.start_ms
    }
}

/// Ordered, non-overlapping token intervals for one utterance.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimestampTrack {
    pub utt_id: String,
    pub entries: Vec<TrackEntry>,
}

impl TimestampTrack {
    pub fn new(utt_id: impl Into<String>, entries: Vec<TrackEntry>) -> Self {
        TimestampTrack {
            utt_id: utt_id.into(),
            entries,
        }
    }

    /// Checks ordering, positive durations, non-overlap and that no two
    /// silences are adjacent.
    pub fn validate(&self) -> Result<()> {
        let mut prev: Option<&TrackEntry> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if !(e.start_ms.is_finite() && e.end_ms.is_finite() && e.start_ms >= 0.0) {
                return Err(Error::InvalidParam(format!(
                    "{}: entry {i} has invalid times",
                    self.utt_id
                )));
            }
            if e.start_ms >= e.end_ms {
                return Err(Error::InvalidParam(format!(
                    "{}: entry {i} is empty ({} >= {})",
                    self.utt_id, e.start_ms, e.end_ms
                )));
            }
            if let Some(p) = prev {
                if e.start_ms < p.end_ms - TIME_EPS_MS {
                    return Err(Error::InvalidParam(format!(
                        "{}: entry {i} overlaps its predecessor",
                        self.utt_id
                    )));
                }
                if p.label.is_silence() && e.label.is_silence() {
                    return Err(Error::InvalidParam(format!(
                        "{}: adjacent silence entries at {i}",
                        self.utt_id
                    )));
                }
            }
            prev = Some(e);
        }
        Ok(())
    }

    /// Non-silence entries, in order.
    pub fn tokens(&self) -> impl Iterator<Item = &TrackEntry> + '_ {
        self.entries.iter().filter(|e| !e.label.is_silence())
    }

    pub fn token_labels(&self) -> Vec<&str> {
        self.tokens().map(|e| e.label.as_str()).collect()
    }

    pub fn token_count(&self) -> usize {
        self.tokens().count()
    }

    /// Copy of the track with silence entries removed.
    pub fn without_silence(&self) -> TimestampTrack {
        TimestampTrack {
            utt_id: self.utt_id.clone(),
            entries: self.tokens().cloned().collect(),
        }
    }

    /// Latest end time over all entries, 0 for an empty track.
    pub fn span_end_ms(&self) -> f64 {
        self.entries.iter().map(|e| e.end_ms).fold(0.0, f64::max)
    }

    /// Same track with every time multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TimestampTrack {
        TimestampTrack {
            utt_id: self.utt_id.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| TrackEntry::new(e.label.clone(), e.start_ms * factor, e.end_ms * factor))
                .collect(),
        }
    }
}

/// Tolerance for comparing millisecond boundaries that went through text.
pub(crate) const TIME_EPS_MS: f64 = 1e-6;
