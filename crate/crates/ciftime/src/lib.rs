//! File formats, configuration and subcommands for CIF token timestamps.
//!
//! * [`weights_file`]: line-delimited JSON weight records.
//! * [`ctm`]: CTM timestamp files.
//! * [`config`]: [`RunConfig`] with file and flag overrides.
//! * [`commands`]: `fire`, `post`, `eval`, `synth` and `ablate` over file contents.
//!
//! The numeric pipeline itself is in [`ciftime_core`], re-exported as [`core`].

pub mod commands;
pub mod config;
pub mod ctm;
pub mod diag;
pub mod weights_file;

pub use ciftime_core as core;

pub use crate::commands::{cmd_ablate, cmd_eval, cmd_fire, cmd_post, cmd_synth, Input, Output};
pub use crate::config::{ConfigArgs, RunConfig};
pub use crate::diag::Diagnostic;
