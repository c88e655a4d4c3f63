//! Continuous integrate-and-fire over a frame weight sequence.
//!
//! Weights are accumulated left to right. When the running sum reaches the
//! threshold at frame `t`, a token fires at `t`: the closing token takes
//! exactly the part of `alpha[t]` it still needs and the remainder opens the
//! next token. With `alpha = (0.3, 0.9, 0.4, 0.4, 0.3)` and threshold 1 this
//! gives `E1 = 0.3 e1 + 0.7 e2`, `E2 = 0.2 e2 + 0.4 e3 + 0.4 e4` and a tail of
//! 0.3 that never fires.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::track::{Label, TimestampTrack, TrackEntry};
use crate::weights::FrameWeights;

/// Relative slack when comparing the running sum against the threshold, so
/// that sums which are mathematically equal to it (`0.2 + 0.4 + 0.4`) fire.
const FIRE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FireConfig {
    pub threshold: f64,
    /// Emit a final token from the leftover accumulation when it reaches this
    /// value. `None` drops the tail.
    pub tail_fire_min: Option<f64>,
}

impl Default for FireConfig {
    fn default() -> Self {
        FireConfig {
            threshold: 1.0,
            tail_fire_min: None,
        }
    }
}

impl FireConfig {
    pub fn with_threshold(threshold: f64) -> Self {
        FireConfig {
            threshold,
            ..FireConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidParam(format!(
                "fire threshold must be positive, got {}",
                self.threshold
            )));
        }
        if let Some(m) = self.tail_fire_min {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParam(format!("tail_fire_min must be positive, got {m}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FireEvent {
    pub token_index: usize,
    pub fire_frame: usize,
    /// Weight of the fire frame left over once every token closing in that
    /// frame has been filled; it opens the next token.
    pub residue_into_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FireResult {
    pub events: Vec<FireEvent>,
    /// `(frame, coefficient)` pairs making up each token's integrated embedding.
    pub token_coeffs: Vec<Vec<(usize, f64)>>,
    /// Accumulated weight that never reached the threshold.
    pub tail_residue: f64,
    /// True when the tail was emitted as a final token (see [`FireConfig::tail_fire_min`]).
    pub tail_fired: bool,
    pub threshold: f64,
    pub n_frames: usize,
}

impl FireResult {
    pub fn token_count(&self) -> usize {
        self.events.len()
    }

    pub fn fire_frames(&self) -> impl Iterator<Item = usize> + '_ {
        self.events.iter().map(|e| e.fire_frame)
    }
}

/// Runs integrate-and-fire with the default configuration and the given threshold.
pub fn integrate_and_fire(w: &FrameWeights, threshold: f64) -> Result<FireResult> {
    integrate_and_fire_with(w, &FireConfig::with_threshold(threshold))
}

pub fn integrate_and_fire_with(w: &FrameWeights, cfg: &FireConfig) -> Result<FireResult> {
    cfg.validate()?;
    w.validate()?;
    let threshold = cfg.threshold;
    let slack = threshold * FIRE_EPS;

    let mut events = Vec::new();
    let mut token_coeffs = Vec::new();
    let mut current: Vec<(usize, f64)> = Vec::new();
    let mut acc = 0.0;

    for (t, &a) in w.alpha.iter().enumerate() {
        let mut remaining = a;
        let first_event = events.len();
        // A frame heavier than the threshold can close several tokens.
        while acc + remaining >= threshold - slack {
            let take = (threshold - acc).max(0.0).min(remaining);
            if take > 0.0 {
                current.push((t, take));
            }
            remaining = (remaining - take).max(0.0);
            token_coeffs.push(core::mem::take(&mut current));
            events.push(FireEvent {
                token_index: events.len(),
                fire_frame: t,
                residue_into_next: 0.0,
            });
            acc = 0.0;
        }
        for e in &mut events[first_event..] {
            e.residue_into_next = remaining;
        }
        if remaining > 0.0 {
            current.push((t, remaining));
            acc += remaining;
        }
    }

    let mut tail_residue = acc;
    let mut tail_fired = false;
    if let Some(min) = cfg.tail_fire_min {
        if tail_residue >= min && !current.is_empty() {
            let last = w.alpha.len() - 1;
            token_coeffs.push(core::mem::take(&mut current));
            events.push(FireEvent {
                token_index: events.len(),
                fire_frame: last,
                residue_into_next: 0.0,
            });
            tail_residue = 0.0;
            tail_fired = true;
        }
    }

    Ok(FireResult {
        events,
        token_coeffs,
        tail_residue,
        tail_fired,
        threshold,
        n_frames: w.alpha.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawInterval {
    pub token_index: usize,
    pub start_ms: f64,
    pub end_ms: f64,
}

/// Token intervals read directly off the fire frames.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawTimestamps {
    pub utt_id: String,
    pub intervals: Vec<RawInterval>,
}

/// Token `k` covers the frames after the previous fire frame up to and
/// including its own fire frame; token 0 starts at frame 0.
///
/// When several tokens fire inside the same frame, that frame's duration is
/// split evenly between them so intervals stay non-empty and disjoint.
pub fn raw_timestamps(fr: &FireResult, w: &FrameWeights) -> Result<RawTimestamps> {
    if fr.n_frames != w.alpha.len() {
        return Err(Error::LengthMismatch {
            expected: w.alpha.len(),
            found: fr.n_frames,
        });
    }
    if let Some(e) = fr.events.iter().find(|e| e.fire_frame >= w.alpha.len()) {
        return Err(Error::InvalidParam(format!(
            "{}: fire frame {} outside {} frames",
            w.utt_id,
            e.fire_frame,
            w.alpha.len()
        )));
    }
    if fr.events.windows(2).any(|p| p[1].fire_frame < p[0].fire_frame) {
        return Err(Error::InvalidParam(format!("{}: fire frames not ordered", w.utt_id)));
    }

    let ms = w.frame_ms;
    let mut intervals = Vec::with_capacity(fr.events.len());
    let mut next_start_frame = 0usize;
    let mut i = 0;
    while i < fr.events.len() {
        let frame = fr.events[i].fire_frame;
        let group = fr.events[i..].iter().take_while(|e| e.fire_frame == frame).count();
        let frame_start = frame as f64 * ms;
        let sub = ms / group as f64;
        for j in 0..group {
            let start = if j == 0 {
                next_start_frame as f64 * ms
            } else {
                frame_start + j as f64 * sub
            };
            let end = if j + 1 == group {
                (frame + 1) as f64 * ms
            } else {
                frame_start + (j + 1) as f64 * sub
            };
            intervals.push(RawInterval {
                token_index: fr.events[i + j].token_index,
                start_ms: start,
                end_ms: end,
            });
        }
        next_start_frame = frame + 1;
        i += group;
    }

    Ok(RawTimestamps {
        utt_id: w.utt_id.clone(),
        intervals,
    })
}

/// Positional label used when no token text is available.
pub fn positional_label(k: usize) -> String {
    format!("tok{k}")
}

impl RawTimestamps {
    /// Attaches labels to the intervals. Without labels tokens are named
    /// `tok0`, `tok1`, ...; a label list of the wrong length is an error.
    pub fn to_track(&self, labels: Option<&[String]>) -> Result<TimestampTrack> {
        if let Some(labels) = labels {
            if labels.len() != self.intervals.len() {
                return Err(Error::LengthMismatch {
                    expected: self.intervals.len(),
                    found: labels.len(),
                });
            }
        }
        let entries = self
            .intervals
            .iter()
            .enumerate()
            .map(|(k, iv)| {
                let label = match labels {
                    Some(l) => l[k].clone(),
                    None => positional_label(k),
                };
                TrackEntry::new(Label::Token(label), iv.start_ms, iv.end_ms)
            })
            .collect();
        Ok(TimestampTrack::new(self.utt_id.clone(), entries))
    }
}
