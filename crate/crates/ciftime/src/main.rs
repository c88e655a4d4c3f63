use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use ciftime::commands::{format_ablation, Input};
use ciftime::core::SynthSpec;
use ciftime::{cmd_ablate, cmd_eval, cmd_fire, cmd_post, cmd_synth, ConfigArgs, Diagnostic};
use clap::{Parser, Subcommand};

/// Token timestamps from CIF weights: fire, post-process, score.
#[derive(Parser)]
#[command(name = "ciftime", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Raw timestamps (CTM) from a weights file
    Fire {
        /// Weights file (JSON lines), `-` for stdin
        weights: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Post-process a raw CTM using the weights it came from
    Post {
        weights: PathBuf,
        raw_ctm: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score a hypothesis CTM against a reference CTM (JSON report)
    Eval {
        reference: PathBuf,
        hypothesis: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic weights file and its ground-truth CTM
    Synth {
        #[arg(long, value_name = "FILE")]
        weights_out: PathBuf,
        #[arg(long, value_name = "FILE")]
        ctm_out: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_utts: usize,
        #[command(flatten)]
        spec: SynthArgs,
    },
    /// Score the post-processing ladder against a reference CTM
    Ablate {
        weights: PathBuf,
        reference: PathBuf,
        /// Print the table as JSON
        #[arg(long)]
        json: bool,
        /// Also write `<system>.ctm` for every row into this directory
        #[arg(long, value_name = "DIR")]
        ctm_dir: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_tokens: Option<usize>,
    #[arg(long, value_name = "FRAMES")]
    min_token_frames: Option<usize>,
    #[arg(long, value_name = "FRAMES")]
    max_token_frames: Option<usize>,
    #[arg(long, value_name = "FRAMES")]
    onset_spread: Option<usize>,
    #[arg(long)]
    onset_lead_weight: Option<f64>,
    #[arg(long)]
    noise_level: Option<f64>,
    #[arg(long, value_name = "FRAMES")]
    leading_sil: Option<usize>,
    #[arg(long, value_name = "FRAMES")]
    trailing_sil: Option<usize>,
    #[arg(long)]
    pause_prob: Option<f64>,
    #[arg(long, value_name = "FRAMES")]
    min_pause_frames: Option<usize>,
    #[arg(long, value_name = "FRAMES")]
    max_pause_frames: Option<usize>,
    #[arg(long)]
    frame_ms: Option<f64>,
    #[arg(long, value_name = "FRAMES")]
    total_frames: Option<usize>,
}

impl SynthArgs {
    fn spec(&self) -> SynthSpec {
        let d = SynthSpec::default();
        SynthSpec {
            rng_seed: self.seed.unwrap_or(d.rng_seed),
            n_tokens: self.n_tokens.unwrap_or(d.n_tokens),
            token_dur_frames: (
                self.min_token_frames.unwrap_or(d.token_dur_frames.0),
                self.max_token_frames.unwrap_or(d.token_dur_frames.1),
            ),
            onset_spread_frames: self.onset_spread.unwrap_or(d.onset_spread_frames),
            onset_lead_weight: self.onset_lead_weight.unwrap_or(d.onset_lead_weight),
            noise_level: self.noise_level.unwrap_or(d.noise_level),
            leading_sil_frames: self.leading_sil.unwrap_or(d.leading_sil_frames),
            trailing_sil_frames: self.trailing_sil.unwrap_or(d.trailing_sil_frames),
            pause_prob: self.pause_prob.unwrap_or(d.pause_prob),
            pause_frames: (
                self.min_pause_frames.unwrap_or(d.pause_frames.0),
                self.max_pause_frames.unwrap_or(d.pause_frames.1),
            ),
            frame_ms: self.frame_ms.unwrap_or(d.frame_ms),
            total_frames: self.total_frames.or(d.total_frames),
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn report(diags: &[Diagnostic]) -> bool {
    for d in diags {
        eprintln!("error: {d}");
    }
    diags.is_empty()
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.config.resolve()?;
    let name = |p: &Path| p.display().to_string();
    match cli.command {
        Command::Fire { weights, output } => {
            let text = read_input(&weights)?;
            let out = cmd_fire(Input::new(&name(&weights), &text), &cfg);
            write_output(output.as_deref(), &out.value)?;
            Ok(report(&out.diagnostics))
        }
        Command::Post {
            weights,
            raw_ctm,
            output,
        } => {
            let w = read_input(&weights)?;
            let c = read_input(&raw_ctm)?;
            let out = cmd_post(Input::new(&name(&weights), &w), Input::new(&name(&raw_ctm), &c), &cfg);
            write_output(output.as_deref(), &out.value)?;
            Ok(report(&out.diagnostics))
        }
        Command::Eval {
            reference,
            hypothesis,
            output,
        } => {
            let r = read_input(&reference)?;
            let h = read_input(&hypothesis)?;
            let out = cmd_eval(Input::new(&name(&reference), &r), Input::new(&name(&hypothesis), &h), &cfg);
            let mut json = serde_json::to_string_pretty(&out.value)?;
            json.push('\n');
            write_output(output.as_deref(), &json)?;
            Ok(report(&out.diagnostics))
        }
        Command::Synth {
            weights_out,
            ctm_out,
            n_utts,
            spec,
        } => {
            let files = match cmd_synth(&spec.spec(), n_utts) {
                Ok(f) => f,
                Err(e) => bail!(e),
            };
            write_output(Some(&weights_out), &files.weights)?;
            write_output(Some(&ctm_out), &files.reference_ctm)?;
            Ok(true)
        }
        Command::Ablate {
            weights,
            reference,
            json,
            ctm_dir,
            output,
        } => {
            let w = read_input(&weights)?;
            let r = read_input(&reference)?;
            let out = cmd_ablate(Input::new(&name(&weights), &w), Input::new(&name(&reference), &r), &cfg);
            if let Some(dir) = ctm_dir {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for (system, ctm) in &out.value.ctms {
                    write_output(Some(&dir.join(format!("{system}.ctm"))), ctm)?;
                }
            }
            let text = if json {
                let mut s = serde_json::to_string_pretty(&out.value.rows)?;
                s.push('\n');
                s
            } else {
                format_ablation(&out.value)
            };
            write_output(output.as_deref(), &text)?;
            Ok(report(&out.diagnostics))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
