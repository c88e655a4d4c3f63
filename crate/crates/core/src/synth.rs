//! Synthetic CIF weight sequences with known token timestamps.
//!
//! Each token's weight mass (exactly 1) sits in the first
//! `onset_spread_frames` frames of its true span, whatever the span's length.
//! The rest of the span, pauses between tokens and boundary silence only get
//! a small floor weight. Raw fire frames therefore end tokens early, which is
//! the behaviour post-processing has to undo.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::track::{TimestampTrack, TrackEntry};
use crate::weights::FrameWeights;

const SYLLABLES: [&str; 16] = [
    "ba", "da", "ga", "ka", "ma", "na", "pa", "sa", "ta", "wo", "ni", "hao", "shi", "de", "le", "zai",
];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub rng_seed: u64,
    pub n_tokens: usize,
    /// Inclusive range of true token durations, in frames.
    pub token_dur_frames: (usize, usize),
    /// Number of frames at the start of each token carrying its weight.
    pub onset_spread_frames: usize,
    /// Weight of the first onset frame when the spread covers two or more
    /// frames; the remaining mass is split over the other onset frames.
    pub onset_lead_weight: f64,
    /// Floor weight on every frame outside onset regions.
    pub noise_level: f64,
    pub leading_sil_frames: usize,
    pub trailing_sil_frames: usize,
    /// Probability of a silent pause after each token but the last.
    pub pause_prob: f64,
    /// Inclusive range of pause lengths, in frames.
    pub pause_frames: (usize, usize),
    pub frame_ms: f64,
    /// Exact utterance length in frames; the trailing silence is padded to
    /// reach it and a layout that does not fit is an error.
    pub total_frames: Option<usize>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            rng_seed: 42,
            n_tokens: 10,
            token_dur_frames: (5, 6),
            onset_spread_frames: 4,
            onset_lead_weight: 0.02,
            noise_level: 0.01,
            leading_sil_frames: 4,
            trailing_sil_frames: 4,
            pause_prob: 0.3,
            pause_frames: (4, 6),
            frame_ms: 40.0,
            total_frames: None,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let (dmin, dmax) = self.token_dur_frames;
        if self.onset_spread_frames == 0 {
            return Err(Error::Synth("onset_spread_frames must be at least 1".into()));
        }
        if dmin > dmax || dmin < self.onset_spread_frames {
            return Err(Error::Synth(format!(
                "token durations {dmin}..={dmax} must be ordered and at least the onset spread {}",
                self.onset_spread_frames
            )));
        }
        if self.pause_frames.0 > self.pause_frames.1 {
            return Err(Error::Synth("pause range is not ordered".into()));
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) {
            return Err(Error::Synth(format!("noise_level must be non-negative, got {}", self.noise_level)));
        }
        if !(self.onset_lead_weight >= 0.0 && self.onset_lead_weight < 1.0) {
            return Err(Error::Synth(format!(
                "onset_lead_weight must lie in [0, 1), got {}",
                self.onset_lead_weight
            )));
        }
        if !(0.0..=1.0).contains(&self.pause_prob) {
            return Err(Error::Synth(format!("pause_prob must lie in [0, 1], got {}", self.pause_prob)));
        }
        if !(self.frame_ms.is_finite() && self.frame_ms > 0.0) {
            return Err(Error::Synth(format!("frame_ms must be positive, got {}", self.frame_ms)));
        }
        Ok(())
    }

    /// Copy of the spec with the seed for utterance `index` of a corpus.
    pub fn for_utterance(&self, index: u64) -> SynthSpec {
        SynthSpec {
            rng_seed: derive_seed(self.rng_seed, index),
            ..self.clone()
        }
    }
}

/// One generated utterance: weights, token labels and the intended track.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthUtterance {
    pub weights: FrameWeights,
    pub labels: Vec<String>,
    pub truth: TimestampTrack,
}

fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates one utterance named `synth`.
pub fn generate(spec: &SynthSpec) -> Result<SynthUtterance> {
    generate_named(spec, "synth")
}

pub fn generate_named(spec: &SynthSpec, utt_id: &str) -> Result<SynthUtterance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let floor = spec.noise_level;

    let mut alpha: Vec<f64> = Vec::new();
    let mut entries: Vec<TrackEntry> = Vec::new();
    let mut labels = Vec::with_capacity(spec.n_tokens);
    let ms = spec.frame_ms;

    let push_silence = |alpha: &mut Vec<f64>, entries: &mut Vec<TrackEntry>, frames: usize| {
        if frames == 0 {
            return;
        }
        let start = alpha.len();
        alpha.extend(core::iter::repeat_n(floor, frames));
        entries.push(TrackEntry::silence(start as f64 * ms, alpha.len() as f64 * ms));
    };

    push_silence(&mut alpha, &mut entries, spec.leading_sil_frames);

    for k in 0..spec.n_tokens {
        let dur = rng.random_range(spec.token_dur_frames.0..=spec.token_dur_frames.1);
        let onset = alpha.len();
        alpha.extend(onset_mass(&mut rng, spec));
        alpha.extend(core::iter::repeat_n(floor, dur - spec.onset_spread_frames));
        let label = String::from(SYLLABLES[rng.random_range(0..SYLLABLES.len())]);
        entries.push(TrackEntry::token(label.clone(), onset as f64 * ms, alpha.len() as f64 * ms));
        labels.push(label);

        if k + 1 < spec.n_tokens && rng.random_bool(spec.pause_prob) {
            let pause = rng.random_range(spec.pause_frames.0..=spec.pause_frames.1);
            push_silence(&mut alpha, &mut entries, pause);
        }
    }

    let mut trailing = spec.trailing_sil_frames;
    if let Some(total) = spec.total_frames {
        let used = alpha.len() + trailing;
        if used > total {
            return Err(Error::Synth(format!(
                "{utt_id}: layout needs {used} frames but only {total} were requested"
            )));
        }
        trailing = total - alpha.len();
    }
    if alpha.is_empty() && trailing == 0 {
        trailing = 1;
    }
    if spec.n_tokens == 0 {
        // one silence for the whole utterance
        entries.clear();
        alpha.extend(core::iter::repeat_n(floor, trailing));
        entries.push(TrackEntry::silence(0.0, alpha.len() as f64 * ms));
    } else {
        push_silence(&mut alpha, &mut entries, trailing);
    }

    let weights = FrameWeights::new(utt_id, ms, alpha, None)?;
    Ok(SynthUtterance {
        weights,
        labels,
        truth: TimestampTrack::new(utt_id, entries),
    })
}

fn onset_mass(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> Vec<f64> {
    let spread = spec.onset_spread_frames;
    if spread == 1 {
        return alloc::vec![1.0];
    }
    let lead = spec.onset_lead_weight;
    let raw: Vec<f64> = (1..spread).map(|_| 0.5 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let body = 1.0 - lead;
    let mut mass = Vec::with_capacity(spread);
    mass.push(lead);
    let mut used = 0.0;
    for (i, r) in raw.iter().enumerate() {
        let share = if i + 1 == raw.len() { body - used } else { body * r / total };
        used += share;
        mass.push(share);
    }
    mass
}

/// Generates `n` utterances named `synth_000`, `synth_001`, ... with seeds
/// derived from `spec.rng_seed`.
pub fn generate_corpus(spec: &SynthSpec, n: usize) -> Result<Vec<SynthUtterance>> {
    (0..n)
        .map(|i| generate_named(&spec.for_utterance(i as u64), &format!("synth_{i:03}")))
        .collect()
}
