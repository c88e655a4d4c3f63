//! Token timestamps from continuous integrate-and-fire (CIF) weights.
//!
//! The crate is `#![no_std]` and only needs `alloc`. It covers the whole
//! numeric pipeline:
//!
//! * [`weights`]: frame weight sequences, the scaled sigmoid/ReLU transform
//!   and an experimental spike smoother.
//! * [`fire`]: the integrate-and-fire scan and raw token intervals.
//! * [`postproc`]: boundary silence trimming, fire delay and silence insertion.
//! * [`align`]: edit-distance token pairing.
//! * [`metrics`]: accumulated averaging shift (AAS) and diarization error rate (DER).
//! * [`synth`]: synthetic weight sequences with known ground truth.
//!
//! File formats and the command line live in the `ciftime` crate.

#![no_std]

extern crate alloc;

pub mod align;
pub mod error;
pub mod fire;
pub mod metrics;
pub mod postproc;
pub mod synth;
pub mod track;
pub mod weights;

pub use crate::align::{align_tokens, PairsMode, TokenPairing};
pub use crate::error::{Error, Result};
pub use crate::fire::{integrate_and_fire, raw_timestamps, FireConfig, FireEvent, FireResult, RawTimestamps};
pub use crate::metrics::{ConfusionMode, DerComponents, DerDenominator, ScoreOptions, ScoreReport};
pub use crate::postproc::{postprocess, PostprocParams, Stages};
pub use crate::synth::{generate, SynthSpec};
pub use crate::track::{Label, TimestampTrack, TrackEntry};
pub use crate::weights::{scaled_cif, weaken_spikes, FrameWeights, ScaleParams};
