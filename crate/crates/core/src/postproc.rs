//! Post-processing of raw fire-frame timestamps.
//!
//! CIF integration starts on the right frame but closes after a roughly fixed
//! number of frames, so raw token ends come early and the following token
//! inherits the low-weight frames in between. Three stages correct this:
//!
//! 1. **Boundary silence.** Leading frames below `theta_s` become silence and
//!    the first token starts at the first frame at or above it. After the last
//!    such frame, `end_keep_frames` frames stay with the last token and the
//!    rest become silence.
//! 2. **Fire delay.** A run of low frames between two tokens is handed to the
//!    earlier token, except for its final frame, which starts the next token.
//!    The run is the first one after the earlier token's fire frame that the
//!    next token's weight mass follows.
//! 3. **Silence insertion.** A run longer than `l_s` frames becomes a silence
//!    entry instead (again without its final frame) and the earlier token ends
//!    where the run starts.
//!
//! Low frames are classified on `alpha` alone and a second application of
//! the pipeline leaves its output unchanged.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::track::{TimestampTrack, TrackEntry, TIME_EPS_MS};
use crate::weights::FrameWeights;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PostprocParams {
    /// Frames with weight below this are low-weight.
    pub theta_s: f64,
    /// Longest low run absorbed by fire delay.
    pub l_s: usize,
    /// Frames kept on the last token after the last non-low frame.
    pub end_keep_frames: usize,
}

impl Default for PostprocParams {
    fn default() -> Self {
        PostprocParams {
            theta_s: 0.05,
            l_s: 3,
            end_keep_frames: 3,
        }
    }
}

impl PostprocParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_s > 0.0 && self.theta_s < 1.0) {
            return Err(Error::InvalidParam(format!("theta_s must lie in (0, 1), got {}", self.theta_s)));
        }
        if self.l_s == 0 {
            return Err(Error::InvalidParam("l_s must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stage toggles, in pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stages {
    pub trim: bool,
    pub fire_delay: bool,
    pub silence_insertion: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages::ALL
    }
}

impl Stages {
    pub const NONE: Stages = Stages {
        trim: false,
        fire_delay: false,
        silence_insertion: false,
    };
    pub const ALL: Stages = Stages {
        trim: true,
        fire_delay: true,
        silence_insertion: true,
    };

    /// Cumulative ladder: raw, +trim, +fire delay, +silence insertion.
    pub fn ladder() -> [Stages; 4] {
        [
            Stages::NONE,
            Stages { trim: true, ..Stages::NONE },
            Stages {
                trim: true,
                fire_delay: true,
                silence_insertion: false,
            },
            Stages::ALL,
        ]
    }
}

/// Tokens after boundary trimming plus the silence spans it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Trimmed {
    pub track: TimestampTrack,
    pub leading: Option<(f64, f64)>,
    pub trailing: Option<(f64, f64)>,
}

impl Trimmed {
    pub fn into_track(self) -> TimestampTrack {
        let Trimmed {
            mut track,
            leading,
            trailing,
        } = self;
        if let Some((s, e)) = leading {
            track.entries.insert(0, TrackEntry::silence(s, e));
        }
        if let Some((s, e)) = trailing {
            track.entries.push(TrackEntry::silence(s, e));
        }
        track
    }
}

fn frame_floor(ms: f64, frame_ms: f64) -> usize {
    libm::floor(ms / frame_ms + 1e-9).max(0.0) as usize
}

fn frame_ceil(ms: f64, frame_ms: f64) -> usize {
    libm::ceil(ms / frame_ms - 1e-9).max(0.0) as usize
}

fn check_fits(track: &TimestampTrack, w: &FrameWeights) -> Result<()> {
    track.validate()?;
    let limit = w.duration_ms() + TIME_EPS_MS;
    if let Some(e) = track.entries.iter().find(|e| e.end_ms > limit) {
        return Err(Error::InvalidParam(format!(
            "{}: entry ending at {} ms runs past the {} frames of weights",
            track.utt_id,
            e.end_ms,
            w.len()
        )));
    }
    Ok(())
}

/// Boundary silence stage. Silence entries already in `raw` are dropped.
///
/// A token is never trimmed below one frame. With no tokens at all the whole
/// utterance becomes one silence span.
pub fn trim_boundary_silence(raw: &TimestampTrack, w: &FrameWeights, p: &PostprocParams) -> Result<Trimmed> {
    p.validate()?;
    w.validate()?;
    check_fits(raw, w)?;
    let mut tokens = raw.without_silence().entries;
    let bounds = speech_bounds(&w.alpha, p.theta_s);
    clip_tail(&mut tokens, w, p, bounds);
    Ok(finish_trim(raw, tokens, w, p, bounds))
}

/// First and last frame at or above `theta`.
fn speech_bounds(alpha: &[f64], theta: f64) -> Option<(usize, usize)> {
    let first = alpha.iter().position(|&a| a >= theta)?;
    let last = alpha.iter().rposition(|&a| a >= theta)?;
    Some((first, last))
}

fn tail_cut(p: &PostprocParams, ms: f64, last_high: usize) -> f64 {
    (last_high + p.end_keep_frames + 1) as f64 * ms
}

/// Clips the last token to `end_keep_frames` past the last non-low frame.
fn clip_tail(tokens: &mut [TrackEntry], w: &FrameWeights, p: &PostprocParams, bounds: Option<(usize, usize)>) {
    let (Some(last), Some((_, e))) = (tokens.last_mut(), bounds) else {
        return;
    };
    let ms = w.frame_ms;
    let min_end = (frame_floor(last.start_ms, ms) + 1) as f64 * ms;
    last.end_ms = last.end_ms.min(tail_cut(p, ms, e).max(min_end));
}

/// Moves the first token's start to the first non-low frame and derives the
/// leading and trailing silence spans.
fn finish_trim(
    raw: &TimestampTrack,
    mut tokens: Vec<TrackEntry>,
    w: &FrameWeights,
    p: &PostprocParams,
    bounds: Option<(usize, usize)>,
) -> Trimmed {
    let ms = w.frame_ms;
    let total_ms = w.duration_ms();
    if tokens.is_empty() {
        return Trimmed {
            track: TimestampTrack::new(raw.utt_id.clone(), tokens),
            leading: Some((0.0, total_ms)),
            trailing: None,
        };
    }
    let Some((b, e)) = bounds else {
        // every frame is low: nothing to anchor the tokens to
        return Trimmed {
            track: TimestampTrack::new(raw.utt_id.clone(), tokens),
            leading: None,
            trailing: None,
        };
    };

    let first = &mut tokens[0];
    let last_frame_of_first = frame_ceil(first.end_ms, ms).saturating_sub(1);
    first.start_ms = (b.min(last_frame_of_first) as f64 * ms).max(first.start_ms);
    let leading = (first.start_ms > 0.0).then_some((0.0, first.start_ms));

    let end = tokens[tokens.len() - 1].end_ms;
    let trailing_start = end.max(tail_cut(p, ms, e));
    let trailing = (trailing_start < total_ms - TIME_EPS_MS).then_some((trailing_start, total_ms));

    Trimmed {
        track: TimestampTrack::new(raw.utt_id.clone(), tokens),
        leading,
        trailing,
    }
}

/// Fire delay and silence insertion over the gaps between consecutive tokens.
///
/// For tokens `k` and `k + 1` the gap region runs from the end of token `k`
/// to the end of token `k + 1`. The first maximal run of low frames in that
/// region that is followed by a non-low frame of token `k + 1` decides the
/// new boundary; frames between the end of token `k` and that run always go
/// to token `k`. Pairs are visited from the last one backwards so each region
/// ends at the final end of token `k + 1`. Silence entries already in `track`
/// are dropped, and `delay` / `insert` select which of the two rules may apply.
pub fn fire_delay_and_insert(
    track: &TimestampTrack,
    w: &FrameWeights,
    p: &PostprocParams,
    delay: bool,
    insert: bool,
) -> Result<TimestampTrack> {
    p.validate()?;
    w.validate()?;
    check_fits(track, w)?;
    let mut tokens = track.without_silence().entries;
    let gaps = adjust_gaps(&mut tokens, w, p, delay, insert);
    Ok(TimestampTrack::new(track.utt_id.clone(), interleave(tokens, gaps)))
}

/// Applies the gap rules in place and returns the silence inserted after
/// each token.
fn adjust_gaps(
    tokens: &mut [TrackEntry],
    w: &FrameWeights,
    p: &PostprocParams,
    delay: bool,
    insert: bool,
) -> Vec<Option<TrackEntry>> {
    let ms = w.frame_ms;
    let mut gaps = alloc::vec![None; tokens.len()];
    if !(delay || insert) {
        return gaps;
    }
    for k in (1..tokens.len()).rev() {
        let (head, tail) = tokens.split_at_mut(k);
        let prev = &mut head[k - 1];
        let next = &mut tail[0];
        let region_start = frame_ceil(prev.end_ms, ms);
        let region_end = frame_ceil(next.end_ms, ms).min(w.len());
        let Some((a, r)) = onset_run(&w.alpha, region_start, region_end, p.theta_s) else {
            continue;
        };
        let onset = (a + r - 1) as f64 * ms;
        if insert && r > p.l_s {
            prev.end_ms = prev.end_ms.max(a as f64 * ms);
            if onset > prev.end_ms + TIME_EPS_MS {
                gaps[k - 1] = Some(TrackEntry::silence(prev.end_ms, onset));
            }
            next.start_ms = next.start_ms.max(onset);
        } else if delay {
            prev.end_ms = prev.end_ms.max(onset);
            next.start_ms = next.start_ms.max(onset);
        }
    }
    gaps
}

fn interleave(tokens: Vec<TrackEntry>, gaps: Vec<Option<TrackEntry>>) -> Vec<TrackEntry> {
    let mut out = Vec::with_capacity(tokens.len() * 2);
    for (t, g) in tokens.into_iter().zip(gaps) {
        out.push(t);
        out.extend(g);
    }
    out
}

/// First maximal run of frames below `theta` inside `[lo, hi)` that is
/// followed by a frame at or above `theta` still inside `[lo, hi)`.
/// Returns `(start, len)`.
fn onset_run(alpha: &[f64], lo: usize, hi: usize, theta: f64) -> Option<(usize, usize)> {
    let mut t = lo;
    while t < hi {
        if alpha[t] >= theta {
            t += 1;
            continue;
        }
        let start = t;
        while t < hi && alpha[t] < theta {
            t += 1;
        }
        if t < hi {
            return Some((start, t - start));
        }
    }
    None
}

/// Runs the enabled stages: boundary silence, then fire delay and silence
/// insertion. The last token is clipped before the gap rules run; the first
/// token's start and the silence spans are settled after them, so a second
/// application changes nothing. With every stage off the tokens come back
/// unchanged.
pub fn postprocess(raw: &TimestampTrack, w: &FrameWeights, p: &PostprocParams, stages: Stages) -> Result<TimestampTrack> {
    p.validate()?;
    w.validate()?;
    check_fits(raw, w)?;

    let mut tokens = raw.without_silence().entries;
    let bounds = speech_bounds(&w.alpha, p.theta_s);
    if stages.trim {
        clip_tail(&mut tokens, w, p, bounds);
    }
    let gaps = adjust_gaps(&mut tokens, w, p, stages.fire_delay, stages.silence_insertion);

    if !stages.trim {
        return Ok(TimestampTrack::new(raw.utt_id.clone(), interleave(tokens, gaps)));
    }
    let n = tokens.len();
    let trimmed = finish_trim(raw, tokens, w, p, bounds);
    let Trimmed {
        track,
        leading,
        trailing,
    } = trimmed;
    debug_assert_eq!(track.entries.len(), n);
    Ok(Trimmed {
        track: TimestampTrack::new(track.utt_id, interleave(track.entries, gaps)),
        leading,
        trailing,
    }
    .into_track())
}
