//! Frame-level CIF weights and the transforms applied to them before firing.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Per-frame integrate weights for one utterance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameWeights {
    pub utt_id: String,
    /// Duration of one encoder step in milliseconds.
    pub frame_ms: f64,
    pub alpha: Vec<f64>,
    /// Pre-sigmoid activations, when the producer kept them.
    pub logits: Option<Vec<f64>>,
}

impl FrameWeights {
    pub fn new(
        utt_id: impl Into<String>,
        frame_ms: f64,
        alpha: Vec<f64>,
        logits: Option<Vec<f64>>,
    ) -> Result<Self> {
        let w = FrameWeights {
            utt_id: utt_id.into(),
            frame_ms,
            alpha,
            logits,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_ms.is_finite() && self.frame_ms > 0.0) {
            return Err(Error::InvalidWeights(format!(
                "{}: frame_ms must be positive, got {}",
                self.utt_id, self.frame_ms
            )));
        }
        if self.alpha.is_empty() {
            return Err(Error::InvalidWeights(format!("{}: empty alpha", self.utt_id)));
        }
        if let Some(t) = self.alpha.iter().position(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "{}: alpha[{t}] = {} is not a finite non-negative value",
                self.utt_id, self.alpha[t]
            )));
        }
        if let Some(logits) = &self.logits {
            if logits.len() != self.alpha.len() {
                return Err(Error::LengthMismatch {
                    expected: self.alpha.len(),
                    found: logits.len(),
                });
            }
            if logits.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidWeights(format!("{}: non-finite logit", self.utt_id)));
            }
        }
        Ok(())
    }

    /// Number of frames `T`.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn duration_ms(&self) -> f64 {
        self.alpha.len() as f64 * self.frame_ms
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Replaces `alpha` with the scaled transform of the stored logits.
    pub fn rescaled(&self, params: ScaleParams) -> Result<FrameWeights> {
        let logits = self.logits.as_ref().ok_or_else(|| {
            Error::InvalidParam(format!(
                "{}: scaled weights need logits, but only alpha is available",
                self.utt_id
            ))
        })?;
        Ok(FrameWeights {
            utt_id: self.utt_id.clone(),
            frame_ms: self.frame_ms,
            alpha: scaled_cif(logits, params),
            logits: self.logits.clone(),
        })
    }
}

/// Scale `gamma` and floor `beta` of the scaled weight transform.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleParams {
    pub gamma: f64,
    pub beta: f64,
}

impl Default for ScaleParams {
    fn default() -> Self {
        ScaleParams { gamma: 0.8, beta: 0.05 }
    }
}

impl ScaleParams {
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        let p = ScaleParams { gamma, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParam(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParam(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        Ok(())
    }

    /// Largest value the transform can produce.
    pub fn ceiling(&self) -> f64 {
        self.gamma * (1.0 - self.beta)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `gamma * max(0, sigmoid(x) - beta)` for every logit.
pub fn scaled_cif(logits: &[f64], params: ScaleParams) -> Vec<f64> {
    logits
        .iter()
        .map(|&x| {
            let shifted = sigmoid(x) - params.beta;
            if shifted > 0.0 {
                params.gamma * shifted
            } else {
                0.0
            }
        })
        .collect()
}

/// Experimental spike smoother.
///
/// Each weight is replaced by the mean of a centred window of `window` frames
/// (truncated at the edges), and the result is rescaled so the total weight,
/// and therefore the fire count, stays the same.
pub fn weaken_spikes(w: &FrameWeights, window: usize) -> Result<FrameWeights> {
    let n = w.alpha.len();
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParam(format!("smoothing window must be odd and >= 1, got {window}")));
    }
    if window > n {
        return Err(Error::InvalidParam(format!(
            "smoothing window {window} exceeds the {n} available frames"
        )));
    }
    if window == 1 {
        return Ok(w.clone());
    }

    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for a in &w.alpha {
        acc += a;
        prefix.push(acc);
    }
    let original = acc;

    let mut smoothed: Vec<f64> = (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half + 1).min(n);
            let s = (prefix[hi] - prefix[lo]).max(0.0);
            s / (hi - lo) as f64
        })
        .collect();

    let total: f64 = smoothed.iter().sum();
    if total > 0.0 {
        let scale = original / total;
        for v in &mut smoothed {
            *v *= scale;
        }
    }

    Ok(FrameWeights {
        utt_id: w.utt_id.clone(),
        frame_ms: w.frame_ms,
        alpha: smoothed,
        logits: w.logits.clone(),
    })
}
