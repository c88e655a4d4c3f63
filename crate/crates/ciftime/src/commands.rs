//! The subcommands as plain functions over file contents.
//!
//! Every command keeps going past bad records and returns what it could
//! produce together with the diagnostics; the binary turns a non-empty
//! diagnostic list into a failing exit code.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ciftime_core::fire::integrate_and_fire_with;
use ciftime_core::metrics::{aggregate, score_utterance};
use ciftime_core::synth::generate_corpus;
use ciftime_core::{
    postprocess, raw_timestamps, weaken_spikes, FrameWeights, ScoreReport, Stages, SynthSpec, TimestampTrack,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::ctm::{format_track, parse_ctm};
use crate::diag::Diagnostic;
use crate::weights_file::{parse_weights, weights_to_string, WeightsEntry, WeightsRecord};

/// A named input: where it came from (for diagnostics) and its text.
#[derive(Debug, Clone, Copy)]
pub struct Input<'a> {
    pub name: &'a str,
    pub text: &'a str,
}

impl<'a> Input<'a> {
    pub fn new(name: &'a str, text: &'a str) -> Self {
        Input { name, text }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output<T> {
    pub value: T,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Output<T> {
    /// True when every record was processed.
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Which weights drive firing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    Alpha,
    /// Scaled sigmoid of the logits.
    Scaled,
}

impl WeightSource {
    pub fn from_config(cfg: &RunConfig) -> Self {
        if cfg.scaled {
            WeightSource::Scaled
        } else {
            WeightSource::Alpha
        }
    }
}

/// Weights actually fed to the fire scan and to post-processing.
pub fn effective_weights(w: &FrameWeights, cfg: &RunConfig, source: WeightSource) -> Result<FrameWeights, String> {
    let w = match source {
        WeightSource::Alpha => w.clone(),
        WeightSource::Scaled if w.logits.is_none() => {
            return Err("scaled weights requested but the record has no logits".into());
        }
        WeightSource::Scaled => w.rescaled(cfg.scale()).map_err(|e| e.to_string())?,
    };
    match cfg.weaken_spikes {
        Some(window) => weaken_spikes(&w, window).map_err(|e| e.to_string()),
        None => Ok(w),
    }
}

/// Fires one record and returns the weights used and the raw track.
pub fn fire_entry(
    entry: &WeightsEntry,
    cfg: &RunConfig,
    source: WeightSource,
) -> Result<(FrameWeights, TimestampTrack), String> {
    let w = effective_weights(&entry.weights, cfg, source)?;
    let fr = integrate_and_fire_with(&w, &cfg.fire()).map_err(|e| e.to_string())?;
    if let Some(tokens) = &entry.tokens {
        if tokens.len() != fr.token_count() {
            return Err(format!("{} token labels but {} fires", tokens.len(), fr.token_count()));
        }
    }
    let raw = raw_timestamps(&fr, &w).map_err(|e| e.to_string())?;
    let track = raw.to_track(entry.tokens.as_deref()).map_err(|e| e.to_string())?;
    Ok((w, track))
}

fn entry_diag(source: &str, entry: &WeightsEntry, message: String) -> Diagnostic {
    Diagnostic::new(source, message)
        .at_line(entry.line)
        .for_utt(entry.weights.utt_id.clone())
}

/// CTM text for `tracks` sorted by utterance id; tracks that cannot be
/// written are reported and left out.
fn render(mut tracks: Vec<&TimestampTrack>, source: &str, diags: &mut Vec<Diagnostic>) -> String {
    tracks.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    let mut out = String::new();
    for t in tracks {
        match format_track(t) {
            Ok(rows) => out.push_str(&rows),
            Err(e) => diags.push(Diagnostic::new(source, e.to_string()).for_utt(t.utt_id.clone())),
        }
    }
    out
}

/// Raw CIF timestamps for every record of a weights file, as CTM text.
pub fn cmd_fire(weights: Input<'_>, cfg: &RunConfig) -> Output<String> {
    let parsed = parse_weights(weights.text, weights.name);
    let mut diagnostics = parsed.diagnostics;
    let source = WeightSource::from_config(cfg);
    let mut tracks = Vec::new();
    for entry in &parsed.items {
        match fire_entry(entry, cfg, source) {
            Ok((_, track)) => tracks.push(track),
            Err(msg) => diagnostics.push(entry_diag(weights.name, entry, msg)),
        }
    }
    let value = render(tracks.iter().collect(), weights.name, &mut diagnostics);
    Output { value, diagnostics }
}

/// Post-processes a raw CTM with the weights it was fired from.
///
/// A weights record without CTM rows is treated as an utterance with no
/// tokens. CTM utterances without a weights record are reported.
pub fn cmd_post(weights: Input<'_>, raw_ctm: Input<'_>, cfg: &RunConfig) -> Output<String> {
    let parsed_w = parse_weights(weights.text, weights.name);
    let parsed_c = parse_ctm(raw_ctm.text, raw_ctm.name);
    let mut diagnostics = parsed_w.diagnostics;
    diagnostics.extend(parsed_c.diagnostics);
    let mut raw: BTreeMap<String, TimestampTrack> =
        parsed_c.items.into_iter().map(|t| (t.utt_id.clone(), t)).collect();
    let source = WeightSource::from_config(cfg);
    let mut tracks = Vec::new();
    for entry in &parsed_w.items {
        let id = &entry.weights.utt_id;
        let track = raw
            .remove(id)
            .unwrap_or_else(|| TimestampTrack::new(id.clone(), Vec::new()));
        let result = effective_weights(&entry.weights, cfg, source)
            .and_then(|w| postprocess(&track, &w, &cfg.postproc(), cfg.stages()).map_err(|e| e.to_string()));
        match result {
            Ok(t) => tracks.push(t),
            Err(msg) => diagnostics.push(entry_diag(weights.name, entry, msg)),
        }
    }
    for id in raw.into_keys() {
        diagnostics.push(Diagnostic::new(raw_ctm.name, "no weights record for this utterance").for_utt(id));
    }
    let value = render(tracks.iter().collect(), weights.name, &mut diagnostics);
    Output { value, diagnostics }
}

/// Score report plus the utterances that appear in only one of the files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub report: ScoreReport,
    pub only_in_ref: Vec<String>,
    pub only_in_hyp: Vec<String>,
}

fn score_common(
    reference: &BTreeMap<String, TimestampTrack>,
    hyp: &BTreeMap<String, TimestampTrack>,
    cfg: &RunConfig,
    source: &str,
    diags: &mut Vec<Diagnostic>,
) -> ScoreReport {
    let opts = cfg.score();
    let mut scores = Vec::new();
    for (id, r) in reference {
        if let Some(h) = hyp.get(id) {
            match score_utterance(r, h, &opts) {
                Ok(s) => scores.push(s),
                Err(e) => diags.push(Diagnostic::new(source, e.to_string()).for_utt(id.clone())),
            }
        }
    }
    aggregate(scores)
}

fn only_in<V, W>(a: &BTreeMap<String, V>, b: &BTreeMap<String, W>) -> Vec<String> {
    a.keys().filter(|k| !b.contains_key(*k)).cloned().collect()
}

fn coverage_diags(only_ref: &[String], only_hyp: &[String], ref_name: &str, hyp_name: &str) -> Vec<Diagnostic> {
    let missing = |ids: &[String], name: &str, other: &str| {
        if ids.is_empty() {
            None
        } else {
            Some(Diagnostic::new(
                name,
                format!("coverage error: {} utterance(s) missing from {other}: {}", ids.len(), ids.join(", ")),
            ))
        }
    };
    missing(only_ref, ref_name, hyp_name)
        .into_iter()
        .chain(missing(only_hyp, hyp_name, ref_name))
        .collect()
}

/// AAS and DER of a hypothesis CTM against a reference CTM.
pub fn cmd_eval(ref_ctm: Input<'_>, hyp_ctm: Input<'_>, cfg: &RunConfig) -> Output<EvalReport> {
    let r = parse_ctm(ref_ctm.text, ref_ctm.name);
    let h = parse_ctm(hyp_ctm.text, hyp_ctm.name);
    let mut diagnostics = r.diagnostics;
    diagnostics.extend(h.diagnostics);
    let by_id = |ts: Vec<TimestampTrack>| -> BTreeMap<String, TimestampTrack> {
        ts.into_iter().map(|t| (t.utt_id.clone(), t)).collect()
    };
    let reference = by_id(r.items);
    let hyp = by_id(h.items);
    let only_in_ref = only_in(&reference, &hyp);
    let only_in_hyp = only_in(&hyp, &reference);
    diagnostics.extend(coverage_diags(&only_in_ref, &only_in_hyp, ref_ctm.name, hyp_ctm.name));
    let report = score_common(&reference, &hyp, cfg, hyp_ctm.name, &mut diagnostics);
    Output {
        value: EvalReport {
            report,
            only_in_ref,
            only_in_hyp,
        },
        diagnostics,
    }
}

/// A synthetic corpus as a weights file (with token labels) and a
/// ground-truth CTM.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFiles {
    pub weights: String,
    pub reference_ctm: String,
}

pub fn cmd_synth(spec: &SynthSpec, n_utts: usize) -> Result<SynthFiles, String> {
    let corpus = generate_corpus(spec, n_utts).map_err(|e| e.to_string())?;
    let records: Vec<WeightsRecord> = corpus
        .iter()
        .map(|u| WeightsRecord::from_weights(&u.weights, Some(u.labels.clone())))
        .collect();
    let mut diags = Vec::new();
    let reference_ctm = render(corpus.iter().map(|u| &u.truth).collect(), "synth", &mut diags);
    if let Some(d) = diags.first() {
        return Err(d.to_string());
    }
    Ok(SynthFiles {
        weights: weights_to_string(&records),
        reference_ctm,
    })
}

const LADDER_NAMES: [&str; 4] = [
    "origin CIF timestamp",
    "+begin/end silence",
    "+fire-delay",
    "+silence insertion",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub system: String,
    pub description: String,
    pub aas_sec: Option<f64>,
    pub der: Option<f64>,
    pub der_percent: Option<f64>,
    pub k_pairs: usize,
    pub utterances: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Ablation {
    pub rows: Vec<AblationRow>,
    /// `(system, CTM text)` for every row.
    #[serde(skip)]
    pub ctms: Vec<(String, String)>,
}

/// Scores the post-processing ladder for plain weights (`CIF-0..3`) and,
/// when every record carries logits, for scaled weights (`SCIF-0..3`).
///
/// The stage toggles of `cfg` are ignored; `scaled` is too, since both
/// weight sources get their own rows.
pub fn cmd_ablate(weights: Input<'_>, ref_ctm: Input<'_>, cfg: &RunConfig) -> Output<Ablation> {
    let parsed_w = parse_weights(weights.text, weights.name);
    let parsed_r = parse_ctm(ref_ctm.text, ref_ctm.name);
    let mut diagnostics = parsed_w.diagnostics;
    diagnostics.extend(parsed_r.diagnostics);
    let entries = parsed_w.items;
    let reference: BTreeMap<String, TimestampTrack> =
        parsed_r.items.into_iter().map(|t| (t.utt_id.clone(), t)).collect();
    let ids: BTreeMap<String, ()> = entries.iter().map(|e| (e.weights.utt_id.clone(), ())).collect();
    let only_ref = only_in(&reference, &ids);
    let only_hyp = only_in(&ids, &reference);
    diagnostics.extend(coverage_diags(&only_ref, &only_hyp, ref_ctm.name, weights.name));

    let mut sources = vec![("CIF", WeightSource::Alpha)];
    let with_logits = entries.iter().filter(|e| e.weights.logits.is_some()).count();
    if with_logits > 0 && with_logits == entries.len() {
        sources.push(("SCIF", WeightSource::Scaled));
    } else if with_logits > 0 {
        diagnostics.push(Diagnostic::new(
            weights.name,
            format!(
                "only {with_logits} of {} records carry logits; scaled rows skipped",
                entries.len()
            ),
        ));
    }

    let mut table = Ablation::default();
    if entries.is_empty() {
        return Output {
            value: table,
            diagnostics,
        };
    }
    for (prefix, source) in sources {
        let mut fired = Vec::new();
        for entry in &entries {
            match fire_entry(entry, cfg, source) {
                Ok(pair) => fired.push(pair),
                Err(msg) => diagnostics.push(entry_diag(weights.name, entry, format!("{prefix}: {msg}"))),
            }
        }
        for (level, stages) in Stages::ladder().into_iter().enumerate() {
            let system = format!("{prefix}-{level}");
            let mut hyp = BTreeMap::new();
            for (w, raw) in &fired {
                match postprocess(raw, w, &cfg.postproc(), stages) {
                    Ok(t) => {
                        hyp.insert(t.utt_id.clone(), t);
                    }
                    Err(e) => diagnostics.push(
                        Diagnostic::new(weights.name, format!("{system}: {e}")).for_utt(w.utt_id.clone()),
                    ),
                }
            }
            let report = score_common(&reference, &hyp, cfg, weights.name, &mut diagnostics);
            table.rows.push(AblationRow {
                system: system.clone(),
                description: LADDER_NAMES[level].to_string(),
                aas_sec: report.aas_sec,
                der: report.der,
                der_percent: report.der_percent,
                k_pairs: report.k_pairs,
                utterances: report.per_utt.len(),
            });
            let ctm = render(hyp.values().collect(), weights.name, &mut diagnostics);
            table.ctms.push((system, ctm));
        }
    }
    Output {
        value: table,
        diagnostics,
    }
}

/// Plain-text table of an ablation run.
pub fn format_ablation(table: &Ablation) -> String {
    let fmt = |v: Option<f64>, digits: usize| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"));
    let mut out = String::new();
    writeln!(out, "{:<8} {:<22} {:>8} {:>8} {:>8}", "system", "stages", "AAS(s)", "DER(%)", "K").unwrap();
    for r in &table.rows {
        writeln!(
            out,
            "{:<8} {:<22} {:>8} {:>8} {:>8}",
            r.system,
            r.description,
            fmt(r.aas_sec, 3),
            fmt(r.der_percent, 2),
            r.k_pairs
        )
        .unwrap();
    }
    out
}
