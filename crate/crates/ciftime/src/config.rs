//! Run configuration shared by all subcommands.
//!
//! Values come from the built-in defaults, then an optional TOML or JSON
//! file, then command-line flags.

use std::path::Path;

use ciftime_core::fire::FireConfig;
use ciftime_core::{ConfusionMode, DerDenominator, PairsMode, PostprocParams, ScaleParams, ScoreOptions, Stages};
use clap::Args;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Accumulated weight needed to emit a token.
    pub threshold: f64,
    /// Emit a final token from a leftover tail weight at least this large.
    pub tail_fire_min: Option<f64>,
    /// Frames with weight below this are treated as silence.
    pub theta_s: f64,
    /// Longest low-weight run absorbed by fire delay.
    pub l_s: usize,
    /// Frames kept after the last non-low frame.
    pub end_keep_frames: usize,
    pub gamma: f64,
    pub beta: f64,
    /// Derive weights from logits with the scaled sigmoid transform.
    pub scaled: bool,
    /// Odd smoothing window applied to the weights before firing (experimental).
    pub weaken_spikes: Option<usize>,
    pub trim: bool,
    pub fire_delay: bool,
    pub silence_insertion: bool,
    pub der_denominator: DerDenominator,
    pub pairs: PairsMode,
    pub confusion: ConfusionMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fire = FireConfig::default();
        let post = PostprocParams::default();
        let scale = ScaleParams::default();
        let score = ScoreOptions::default();
        RunConfig {
            threshold: fire.threshold,
            tail_fire_min: fire.tail_fire_min,
            theta_s: post.theta_s,
            l_s: post.l_s,
            end_keep_frames: post.end_keep_frames,
            gamma: scale.gamma,
            beta: scale.beta,
            scaled: false,
            weaken_spikes: None,
            trim: true,
            fire_delay: true,
            silence_insertion: true,
            der_denominator: score.der_denominator,
            pairs: score.pairs,
            confusion: score.confusion,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Io { path: String, source: std::io::Error },
    #[error("bad TOML config {path}")]
    Toml { path: String, source: toml::de::Error },
    #[error("bad JSON config {path}")]
    Json { path: String, source: serde_json::Error },
    #[error("invalid configuration")]
    Invalid(#[from] ciftime_core::Error),
}

impl RunConfig {
    /// Reads a config file; `.json` files are JSON, anything else TOML.
    /// Missing keys keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: shown, source })
        } else {
            toml::from_str(&text).map_err(|source| ConfigError::Toml { path: shown, source })
        }
    }

    pub fn fire(&self) -> FireConfig {
        FireConfig {
            threshold: self.threshold,
            tail_fire_min: self.tail_fire_min,
        }
    }

    pub fn postproc(&self) -> PostprocParams {
        PostprocParams {
            theta_s: self.theta_s,
            l_s: self.l_s,
            end_keep_frames: self.end_keep_frames,
        }
    }

    pub fn scale(&self) -> ScaleParams {
        ScaleParams {
            gamma: self.gamma,
            beta: self.beta,
        }
    }

    pub fn stages(&self) -> Stages {
        Stages {
            trim: self.trim,
            fire_delay: self.fire_delay,
            silence_insertion: self.silence_insertion,
        }
    }

    pub fn score(&self) -> ScoreOptions {
        ScoreOptions {
            pairs: self.pairs,
            der_denominator: self.der_denominator,
            confusion: self.confusion,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.fire().validate()?;
        self.postproc().validate()?;
        self.scale().validate()?;
        if let Some(w) = self.weaken_spikes {
            if w == 0 || w.is_multiple_of(2) {
                return Err(ciftime_core::Error::InvalidParam(format!("weaken_spikes window must be odd, got {w}")).into());
            }
        }
        Ok(())
    }
}

fn parse_pairs(s: &str) -> Result<PairsMode, String> {
    match s {
        "match_only" => Ok(PairsMode::MatchOnly),
        "match_and_sub" => Ok(PairsMode::MatchAndSub),
        _ => Err("expected match_only or match_and_sub".into()),
    }
}

fn parse_denominator(s: &str) -> Result<DerDenominator, String> {
    match s {
        "ref_speech" => Ok(DerDenominator::RefSpeech),
        "utt_span" => Ok(DerDenominator::UttSpan),
        _ => Err("expected ref_speech or utt_span".into()),
    }
}

fn parse_confusion(s: &str) -> Result<ConfusionMode, String> {
    match s {
        "pairing" => Ok(ConfusionMode::Pairing),
        "label_only" => Ok(ConfusionMode::LabelOnly),
        _ => Err("expected pairing or label_only".into()),
    }
}

/// Command-line overrides, one flag per [`RunConfig`] field.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML (or .json) file with RunConfig fields
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,
    /// Accumulated weight that emits a token [default: 1.0]
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Emit a last token from a leftover weight at least this large
    #[arg(long, global = true, value_name = "WEIGHT")]
    pub tail_fire_min: Option<f64>,
    /// Frames below this weight count as silence [default: 0.05]
    #[arg(long, global = true)]
    pub theta_s: Option<f64>,
    /// Longest low run absorbed by fire delay [default: 3]
    #[arg(long, global = true, value_name = "FRAMES")]
    pub l_s: Option<usize>,
    /// Frames kept after the last non-silent frame [default: 3]
    #[arg(long, global = true, value_name = "FRAMES")]
    pub end_keep_frames: Option<usize>,
    /// Scale of the scaled weights [default: 0.8]
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Sigmoid floor of the scaled weights [default: 0.05]
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Use gamma * relu(sigmoid(logits) - beta) as the weights
    #[arg(long, global = true, value_name = "BOOL")]
    pub scaled: Option<bool>,
    /// Smooth weights with this odd window before firing (experimental)
    #[arg(long, global = true, value_name = "WINDOW")]
    pub weaken_spikes: Option<usize>,
    /// Boundary silence stage [default: true]
    #[arg(long, global = true, value_name = "BOOL")]
    pub trim: Option<bool>,
    /// Fire delay stage [default: true]
    #[arg(long, global = true, value_name = "BOOL")]
    pub fire_delay: Option<bool>,
    /// Silence insertion stage [default: true]
    #[arg(long, global = true, value_name = "BOOL")]
    pub silence_insertion: Option<bool>,
    /// ref_speech or utt_span
    #[arg(long, global = true, value_parser = parse_denominator, value_name = "MODE")]
    pub der_denominator: Option<DerDenominator>,
    /// match_only or match_and_sub
    #[arg(long, global = true, value_parser = parse_pairs, value_name = "MODE")]
    pub pairs: Option<PairsMode>,
    /// pairing or label_only
    #[arg(long, global = true, value_parser = parse_confusion, value_name = "MODE")]
    pub confusion: Option<ConfusionMode>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then the flags; the result is validated.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut cfg.threshold, &self.threshold);
        if self.tail_fire_min.is_some() {
            cfg.tail_fire_min = self.tail_fire_min;
        }
        set(&mut cfg.theta_s, &self.theta_s);
        set(&mut cfg.l_s, &self.l_s);
        set(&mut cfg.end_keep_frames, &self.end_keep_frames);
        set(&mut cfg.gamma, &self.gamma);
        set(&mut cfg.beta, &self.beta);
        set(&mut cfg.scaled, &self.scaled);
        if self.weaken_spikes.is_some() {
            cfg.weaken_spikes = self.weaken_spikes;
        }
        set(&mut cfg.trim, &self.trim);
        set(&mut cfg.fire_delay, &self.fire_delay);
        set(&mut cfg.silence_insertion, &self.silence_insertion);
        set(&mut cfg.der_denominator, &self.der_denominator);
        set(&mut cfg.pairs, &self.pairs);
        set(&mut cfg.confusion, &self.confusion);
    }
}
