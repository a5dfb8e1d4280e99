//! End-to-end runs: decode, evaluate, sweep. Pure functions of their inputs,
//! so re-running a manifest reproduces its outputs byte for byte.

use std::fmt::Write as _;
use std::thread;

use serde::Serialize;

use crate::classify::{decode_classification, open_instance_provider};
use crate::decode::decode;
use crate::error::{Error, Result};
use crate::eval::{evaluate_with, percent, Average, EvalReport, ReportFormat};
use crate::manifest::{Mode, RunManifest, Settings};
use crate::provider::ProviderSource;
use crate::strategy::SweepRun;
use crate::types::{render_punctuated, PunctClass, TokenStream};

/// Files produced by a decode run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub labels: Vec<PunctClass>,
    /// The transcript with marks appended to labelled words, newline-terminated.
    pub punctuated: String,
    /// One wire label per line.
    pub labels_text: String,
}

/// Decodes an unpunctuated transcript as the manifest prescribes.
pub fn execute_decode(manifest: &RunManifest, transcript: &str) -> Result<DecodeOutput> {
    let stream = TokenStream::from_text(transcript)?;
    let labels = decode_labels(manifest, stream.tokens())?;
    let mut punctuated = render_punctuated(stream.tokens(), &labels)?;
    punctuated.push('\n');
    Ok(DecodeOutput {
        labels_text: render_labels(&labels),
        punctuated,
        labels,
    })
}

/// Labels for `tokens` under the manifest's mode, strategy and provider.
pub fn decode_labels(manifest: &RunManifest, tokens: &[String]) -> Result<Vec<PunctClass>> {
    match manifest.mode {
        Mode::Tagging => {
            let provider = manifest.provider.open()?;
            Ok(decode(tokens, &manifest.config, provider.as_ref())?.labels)
        }
        Mode::Classification => {
            let provider = open_instance_provider(&manifest.provider)?;
            Ok(decode_classification(
                provider.as_ref(),
                tokens,
                manifest.lookahead,
                manifest.config.window(),
            )?
            .labels)
        }
    }
}

pub fn render_labels(labels: &[PunctClass]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(l.wire_name());
        out.push('\n');
    }
    out
}

/// Parses a label file: one class name per line, blank lines ignored.
pub fn parse_labels(text: &str, origin: &str) -> Result<Vec<PunctClass>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.parse()
                .map_err(|e: Error| Error::parse(origin, i + 1, e.to_string()))
        })
        .collect()
}

/// Scores two label files, naming the first line where they stop pairing up
/// when their lengths differ.
pub fn execute_eval(
    predicted: &str,
    predicted_origin: &str,
    reference: &str,
    reference_origin: &str,
    average: Average,
) -> Result<EvalReport> {
    let pred = parse_labels(predicted, predicted_origin)?;
    let gold = parse_labels(reference, reference_origin)?;
    if pred.len() != gold.len() {
        let (longer, line) = if pred.len() > gold.len() {
            (predicted_origin, gold.len() + 1)
        } else {
            (reference_origin, pred.len() + 1)
        };
        return Err(Error::LengthMismatch(format!(
            "{predicted_origin} has {} labels, {reference_origin} has {}; label {line} of {longer} has no counterpart",
            pred.len(),
            gold.len()
        )));
    }
    evaluate_with(&pred, &gold, average)
}

/// A sweep over (window, stride) cells, each scored at several lookaheads
/// in real-time mode.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub runs: Vec<SweepRun>,
    pub mode: Mode,
    /// May contain `{w}`, `{s}` and `{l}` placeholders.
    pub provider: ProviderSource,
    pub base: Settings,
    pub average: Average,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub id: String,
    pub window: usize,
    pub stride: usize,
    pub lookaheads: Vec<usize>,
    pub f1: Vec<f64>,
    pub mean_f1: f64,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepPlan {
    /// The manifest of one sub-run.
    pub fn manifest(&self, run: &SweepRun, lookahead: usize) -> Result<RunManifest> {
        let mut s = self.base.clone();
        s.set("strategy", "realtime")
            .set("mode", self.mode.as_str())
            .set("window", run.window)
            .set("lookahead", lookahead)
            .set(
                "provider",
                self.provider.instantiate(run.window, run.stride, lookahead),
            );
        RunManifest::from_settings(&s)
    }
}

fn score_cell(plan: &SweepPlan, run: &SweepRun, reference: &TokenStream) -> Result<SweepRow> {
    let gold = reference
        .labels()
        .ok_or_else(|| Error::Input("sweep needs reference labels".into()))?;
    let mut f1 = Vec::with_capacity(run.lookaheads.len());
    for &l in &run.lookaheads {
        let manifest = plan.manifest(run, l)?;
        let labels = decode_labels(&manifest, reference.tokens()).map_err(|e| {
            Error::Provider(format!(
                "sub-run {} l={l} failed: {e}\n{}",
                run.id,
                manifest.to_text()
            ))
        })?;
        f1.push(
            evaluate_with(&labels, gold, plan.average)?
                .overall
                .metrics
                .f1,
        );
    }
    let mean_f1 = f1.iter().sum::<f64>() / f1.len() as f64;
    Ok(SweepRow {
        id: run.id.clone(),
        window: run.window,
        stride: run.stride,
        lookaheads: run.lookaheads.clone(),
        f1,
        mean_f1,
        best: false,
    })
}

/// Runs every cell (in parallel) and reports rows in grid order. The cell
/// with the highest mean F1 is marked best; ties go to the earlier cell.
pub fn execute_sweep(plan: &SweepPlan, reference: &TokenStream) -> Result<SweepTable> {
    let results: Vec<Result<SweepRow>> = thread::scope(|scope| {
        let handles: Vec<_> = plan
            .runs
            .iter()
            .map(|run| scope.spawn(move || score_cell(plan, run, reference)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut best: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if best.map_or(true, |b| row.mean_f1 > rows[b].mean_f1) {
            best = Some(i);
        }
    }
    if let Some(b) = best {
        rows[b].best = true;
    }
    Ok(SweepTable { rows })
}

impl SweepTable {
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.best)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let mut out = String::new();
        match format {
            ReportFormat::Records => {
                for row in &self.rows {
                    out.push_str(&serde_json::to_string(row).expect("row serializes"));
                    out.push('\n');
                }
            }
            ReportFormat::Table => {
                let lookaheads = self
                    .rows
                    .first()
                    .map(|r| r.lookaheads.clone())
                    .unwrap_or_default();
                let _ = write!(out, "{:<12} {:>5} {:>5}", "run", "w", "s");
                for l in &lookaheads {
                    let _ = write!(out, " {:>7}", format!("F1@l={l}"));
                }
                let _ = writeln!(out, " {:>7} best", "mean");
                for row in &self.rows {
                    let _ = write!(out, "{:<12} {:>5} {:>5}", row.id, row.window, row.stride);
                    for f in &row.f1 {
                        let _ = write!(out, " {:>7.1}", percent(*f));
                    }
                    let _ = writeln!(
                        out,
                        " {:>7.1} {}",
                        percent(row.mean_f1),
                        if row.best { "*" } else { "" }
                    );
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_files() {
        let labels = parse_labels("O\ncomma\n\nPERIOD\n", "l").unwrap();
        assert_eq!(
            labels,
            vec![PunctClass::O, PunctClass::Comma, PunctClass::Period]
        );
        assert_eq!(render_labels(&labels), "O\nCOMMA\nPERIOD\n");
        let err = parse_labels("O\nCOLON\n", "l.txt").unwrap_err();
        assert!(err.to_string().starts_with("l.txt:2:"));
    }

    #[test]
    fn eval_length_mismatch_names_the_line() {
        let err = execute_eval("O\nO\nO\n", "pred", "O\n", "gold", Average::Micro).unwrap_err();
        assert_eq!(err.category().as_str(), "mismatch");
        assert!(err.to_string().contains("label 2 of pred"), "{err}");
    }

    #[test]
    fn decode_run_is_invertible() {
        let mut s = Settings::new();
        s.set("strategy", "custom")
            .set("window", 4)
            .set("mask_left", 1)
            .set("mask_right", 1)
            .set("overlap_n", 2)
            .set("provider", "rule:");
        let m = RunManifest::from_settings(&s).unwrap();
        let text = "so we met·P then left·C ok";
        let out = execute_decode(&m, text).unwrap();
        assert_eq!(out.punctuated, "so we met·P. then left·C, ok\n");
        let back = TokenStream::from_punctuated(&out.punctuated).unwrap();
        assert_eq!(
            back.tokens(),
            TokenStream::from_text(text).unwrap().tokens()
        );
        assert_eq!(back.labels().unwrap(), out.labels.as_slice());
    }
}
