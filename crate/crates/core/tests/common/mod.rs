//! Independent reference computations used to check the library.
//!
//! Nothing here calls into the code paths it is used to verify.

#![allow(dead_code)]

use ciftime_core::{Label, TimestampTrack, TrackEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Number of fires predicted from the prefix sum alone.
pub fn fire_count_oracle(alpha: &[f64], threshold: f64) -> usize {
    let total: f64 = alpha.iter().sum();
    (total / threshold).floor() as usize
}

/// Plain two-row Levenshtein distance.
pub fn edit_distance_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Centred moving average with truncated edges, rescaled to the input total.
pub fn smoothing_oracle(alpha: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = alpha.len() as isize;
    let mut out = Vec::with_capacity(alpha.len());
    for t in 0..n {
        let mut sum = 0.0;
        let mut count = 0.0;
        for k in -(half as isize)..=(half as isize) {
            let i = t + k;
            if i >= 0 && i < n {
                sum += alpha[i as usize];
                count += 1.0;
            }
        }
        out.push(sum / count);
    }
    let before: f64 = alpha.iter().sum();
    let after: f64 = out.iter().sum();
    if after > 0.0 {
        out.iter_mut().for_each(|v| *v *= before / after);
    }
    out
}

/// Mean absolute start/end shift over the pairs, computed in seconds straight from the entries.
pub fn aas_oracle(reference: &TimestampTrack, hyp: &TimestampTrack, pairs: &[(usize, usize)]) -> Option<f64> {
    let r: Vec<&TrackEntry> = reference.entries.iter().filter(|e| e.label != Label::Silence).collect();
    let h: Vec<&TrackEntry> = hyp.entries.iter().filter(|e| e.label != Label::Silence).collect();
    if pairs.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for &(i, j) in pairs {
        total += (r[i].start_ms / 1000.0 - h[j].start_ms / 1000.0).abs();
        total += (r[i].end_ms / 1000.0 - h[j].end_ms / 1000.0).abs();
    }
    Some(total / (2.0 * pairs.len() as f64))
}

/// DER terms from sampling both tracks at the centre of every millisecond.
/// Returns `(false_alarm, missed, confusion, ref_speech)` in seconds.
pub fn der_oracle_1ms(reference: &TimestampTrack, hyp: &TimestampTrack, pairs: &[(usize, usize)]) -> (f64, f64, f64, f64) {
    let speech = |t: &TimestampTrack| -> Vec<(f64, f64)> {
        t.entries
            .iter()
            .filter(|e| e.label != Label::Silence)
            .map(|e| (e.start_ms, e.end_ms))
            .collect()
    };
    let r = speech(reference);
    let h = speech(hyp);
    let end = r.iter().chain(h.iter()).map(|s| s.1).fold(0.0, f64::max);
    let who = |segs: &[(f64, f64)], t: f64| segs.iter().position(|&(s, e)| s <= t && t < e);
    let (mut fa, mut miss, mut conf, mut ref_speech) = (0u64, 0u64, 0u64, 0u64);
    let ticks = end.ceil() as u64;
    for ms in 0..ticks {
        let t = ms as f64 + 0.5;
        let a = who(&r, t);
        let b = who(&h, t);
        if a.is_some() {
            ref_speech += 1;
        }
        match (a, b) {
            (None, Some(_)) => fa += 1,
            (Some(_), None) => miss += 1,
            (Some(i), Some(j)) => {
                if !pairs.contains(&(i, j)) {
                    conf += 1;
                }
            }
            (None, None) => {}
        }
    }
    let s = |n: u64| n as f64 / 1000.0;
    (s(fa), s(miss), s(conf), s(ref_speech))
}

const LABELS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Random reference track of at least `min_ms`, with occasional silences.
/// Boundaries land on whole milliseconds when `ms_grid` is set.
pub fn random_reference(rng: &mut ChaCha8Rng, min_ms: f64, ms_grid: bool) -> TimestampTrack {
    let snap = |x: f64| if ms_grid { x.round() } else { x };
    let mut t = 0.0;
    let mut entries = Vec::new();
    let mut last_silence = true;
    while t < min_ms {
        let dur = snap(rng.random_range(40.0..600.0));
        if !last_silence && rng.random_bool(0.2) {
            entries.push(TrackEntry::silence(t, t + dur));
            last_silence = true;
        } else {
            let label = LABELS[rng.random_range(0..LABELS.len())];
            entries.push(TrackEntry::token(label, t, t + dur));
            last_silence = false;
        }
        t += dur;
    }
    TimestampTrack::new("r", entries)
}

/// Hypothesis derived from `reference`: jittered boundaries, dropped,
/// relabelled and inserted tokens.
pub fn perturbed_hypothesis(rng: &mut ChaCha8Rng, reference: &TimestampTrack, ms_grid: bool) -> TimestampTrack {
    let snap = |x: f64| if ms_grid { x.round() } else { x };
    let mut entries: Vec<TrackEntry> = Vec::new();
    let mut cursor = 0.0;
    for e in reference.tokens() {
        if rng.random_bool(0.1) {
            continue;
        }
        let mut start = snap(e.start_ms + rng.random_range(-80.0..80.0)).max(cursor);
        let mut end = snap(e.end_ms + rng.random_range(-80.0..80.0));
        if end <= start + 1.0 {
            end = start + 20.0;
        }
        if rng.random_bool(0.1) {
            // extra short token in front
            let ins_end = start + 20.0;
            entries.push(TrackEntry::token("z", start, ins_end));
            start = ins_end;
            if end <= start + 1.0 {
                end = start + 20.0;
            }
        }
        let label = if rng.random_bool(0.1) { "x" } else { e.label.as_str() };
        entries.push(TrackEntry::token(label, start, end));
        cursor = end;
    }
    TimestampTrack::new("r", entries)
}
