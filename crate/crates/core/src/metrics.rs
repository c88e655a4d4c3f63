//! Timestamp scoring: accumulated averaging shift (AAS) and diarization
//! error rate (DER) with tokens treated as speakers.
//!
//! Both metrics work on the non-silence entries of two tracks. Tokens are
//! matched through an edit-distance [`TokenPairing`], so a repeated character
//! is still told apart from its neighbours.

use alloc::string::String;
use alloc::vec::Vec;

use crate::align::{align_tokens_with, PairsMode, TokenPairing};
use crate::error::{Error, Result};
use crate::track::TimestampTrack;

const MS_PER_SEC: f64 = 1000.0;

/// What the DER denominator measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DerDenominator {
    /// Total duration of reference tokens.
    #[default]
    RefSpeech,
    /// From 0 to the latest end time in either track.
    UttSpan,
}

/// How speaker confusion decides whether two overlapping tokens agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConfusionMode {
    /// The hypothesis token must be the pairing partner of the reference token.
    #[default]
    Pairing,
    /// Any hypothesis token with the same label text counts as correct.
    LabelOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreOptions {
    pub pairs: PairsMode,
    pub der_denominator: DerDenominator,
    pub confusion: ConfusionMode,
}

/// DER numerator terms and denominator, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerComponents {
    pub false_alarm_sec: f64,
    pub missed_sec: f64,
    pub confusion_sec: f64,
    pub scored_total_sec: f64,
}

impl DerComponents {
    pub fn error_sec(&self) -> f64 {
        self.false_alarm_sec + self.missed_sec + self.confusion_sec
    }

    pub fn der(&self) -> Result<f64> {
        if self.scored_total_sec > 0.0 {
            Ok(self.error_sec() / self.scored_total_sec)
        } else {
            Err(Error::Undefined("no scored time for DER"))
        }
    }

    fn add(&mut self, other: &DerComponents) {
        self.false_alarm_sec += other.false_alarm_sec;
        self.missed_sec += other.missed_sec;
        self.confusion_sec += other.confusion_sec;
        self.scored_total_sec += other.scored_total_sec;
    }
}

/// Running sums behind AAS, so utterances can be pooled under one `K`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AasTally {
    /// Sum over pairs of `|start shift| + |end shift|`, seconds.
    pub shift_sum_sec: f64,
    pub k: usize,
}

impl AasTally {
    pub fn from_tracks(reference: &TimestampTrack, hyp: &TimestampTrack, pairing: &TokenPairing) -> Result<Self> {
        let r: Vec<_> = reference.tokens().collect();
        let h: Vec<_> = hyp.tokens().collect();
        let mut shift_sum_ms = 0.0;
        for &(ri, hi) in &pairing.pairs {
            let (Some(a), Some(b)) = (r.get(ri), h.get(hi)) else {
                return Err(Error::LengthMismatch {
                    expected: r.len().min(h.len()),
                    found: ri.max(hi) + 1,
                });
            };
            shift_sum_ms += (a.start_ms - b.start_ms).abs() + (a.end_ms - b.end_ms).abs();
        }
        Ok(AasTally {
            shift_sum_sec: shift_sum_ms / MS_PER_SEC,
            k: pairing.pairs.len(),
        })
    }

    pub fn merge(&mut self, other: &AasTally) {
        self.shift_sum_sec += other.shift_sum_sec;
        self.k += other.k;
    }

    pub fn value(&self) -> Result<f64> {
        if self.k == 0 {
            Err(Error::Undefined("no paired tokens for AAS"))
        } else {
            Ok(self.shift_sum_sec / (2 * self.k) as f64)
        }
    }
}

/// Mean absolute begin/end shift over paired tokens, in seconds.
pub fn aas(reference: &TimestampTrack, hyp: &TimestampTrack, pairing: &TokenPairing) -> Result<f64> {
    AasTally::from_tracks(reference, hyp, pairing)?.value()
}

struct Segment<'a> {
    start: f64,
    end: f64,
    index: usize,
    label: &'a str,
}

fn speech_segments(track: &TimestampTrack) -> Vec<Segment<'_>> {
    track
        .tokens()
        .enumerate()
        .map(|(index, e)| Segment {
            start: e.start_ms,
            end: e.end_ms,
            index,
            label: e.label.as_str(),
        })
        .collect()
}

/// Index of the segment covering `[lo, hi)`, advancing `cursor` monotonically.
fn covering<'s, 'a>(segs: &'s [Segment<'a>], cursor: &mut usize, lo: f64, hi: f64) -> Option<&'s Segment<'a>> {
    while *cursor < segs.len() && segs[*cursor].end <= lo {
        *cursor += 1;
    }
    segs.get(*cursor).filter(|s| s.start <= lo && s.end >= hi)
}

/// Exact DER terms from a boundary sweep over both tracks.
///
/// Between consecutive boundaries each track is either silent or inside one
/// token. Hypothesis speech over reference silence is false alarm, reference
/// speech over hypothesis silence is missed, and overlapping tokens that are
/// not partners under `pairing` (or do not share a label in
/// [`ConfusionMode::LabelOnly`]) are confusion.
pub fn der_components(
    reference: &TimestampTrack,
    hyp: &TimestampTrack,
    pairing: &TokenPairing,
    opts: &ScoreOptions,
) -> Result<DerComponents> {
    reference.validate()?;
    hyp.validate()?;
    let ref_segs = speech_segments(reference);
    let hyp_segs = speech_segments(hyp);
    let partner = pairing.ref_to_hyp(ref_segs.len());

    let mut bounds: Vec<f64> = ref_segs
        .iter()
        .chain(hyp_segs.iter())
        .flat_map(|s| [s.start, s.end])
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();

    let (mut fa, mut miss, mut conf) = (0.0, 0.0, 0.0);
    let (mut rc, mut hc) = (0usize, 0usize);
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let r = covering(&ref_segs, &mut rc, lo, hi);
        let h = covering(&hyp_segs, &mut hc, lo, hi);
        match (r, h) {
            (None, Some(_)) => fa += len,
            (Some(_), None) => miss += len,
            (Some(r), Some(h)) => {
                let agree = match opts.confusion {
                    ConfusionMode::Pairing => partner[r.index] == Some(h.index),
                    ConfusionMode::LabelOnly => r.label == h.label,
                };
                if !agree {
                    conf += len;
                }
            }
            (None, None) => {}
        }
    }

    let scored_ms = match opts.der_denominator {
        DerDenominator::RefSpeech => ref_segs.iter().map(|s| s.end - s.start).sum(),
        DerDenominator::UttSpan => reference.span_end_ms().max(hyp.span_end_ms()),
    };

    Ok(DerComponents {
        false_alarm_sec: fa / MS_PER_SEC,
        missed_sec: miss / MS_PER_SEC,
        confusion_sec: conf / MS_PER_SEC,
        scored_total_sec: scored_ms / MS_PER_SEC,
    })
}

/// DER as a fraction.
pub fn der(reference: &TimestampTrack, hyp: &TimestampTrack, pairing: &TokenPairing, opts: &ScoreOptions) -> Result<f64> {
    der_components(reference, hyp, pairing, opts)?.der()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UttScore {
    pub utt_id: String,
    /// `None` when the utterance has no paired tokens.
    pub aas_sec: Option<f64>,
    pub shift_sum_sec: f64,
    pub k_pairs: usize,
    pub edit_distance: usize,
    /// `None` when the utterance has no scored time.
    pub der: Option<f64>,
    pub components: DerComponents,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreReport {
    /// Corpus AAS with a single `K` over all utterances.
    pub aas_sec: Option<f64>,
    pub der: Option<f64>,
    pub der_percent: Option<f64>,
    pub components: DerComponents,
    pub k_pairs: usize,
    pub per_utt: Vec<UttScore>,
}

/// Aligns the token labels of both tracks and scores one utterance.
pub fn score_utterance(reference: &TimestampTrack, hyp: &TimestampTrack, opts: &ScoreOptions) -> Result<UttScore> {
    let pairing = align_tokens_with(&reference.token_labels(), &hyp.token_labels(), opts.pairs);
    let tally = AasTally::from_tracks(reference, hyp, &pairing)?;
    let components = der_components(reference, hyp, &pairing, opts)?;
    Ok(UttScore {
        utt_id: reference.utt_id.clone(),
        aas_sec: tally.value().ok(),
        shift_sum_sec: tally.shift_sum_sec,
        k_pairs: tally.k,
        edit_distance: pairing.edit_distance,
        der: components.der().ok(),
        components,
    })
}

/// Pools per-utterance scores; the order of `scores` is kept in the report.
pub fn aggregate(scores: Vec<UttScore>) -> ScoreReport {
    let mut tally = AasTally::default();
    let mut components = DerComponents::default();
    for s in &scores {
        tally.merge(&AasTally {
            shift_sum_sec: s.shift_sum_sec,
            k: s.k_pairs,
        });
        components.add(&s.components);
    }
    let der = components.der().ok();
    ScoreReport {
        aas_sec: tally.value().ok(),
        der,
        der_percent: der.map(|d| d * 100.0),
        components,
        k_pairs: tally.k,
        per_utt: scores,
    }
}

/// Scores `(reference, hypothesis)` track pairs, in order.
pub fn score_corpus<'a, I>(pairs: I, opts: &ScoreOptions) -> Result<ScoreReport>
where
    I: IntoIterator<Item = (&'a TimestampTrack, &'a TimestampTrack)>,
{
    let scores = pairs
        .into_iter()
        .map(|(r, h)| score_utterance(r, h, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(scores))
}
