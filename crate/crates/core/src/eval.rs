//! Precision, recall and F1 per punctuation class and overall.
//!
//! `O` is never scored: it has no row of its own and does not enter the
//! overall counts. A word predicted as Comma but labelled Period counts as a
//! false positive for Comma and a false negative for Period.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::PunctClass;

/// How the overall row is aggregated over Comma, Period and Question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Average {
    /// Metrics of the summed confusion counts.
    #[default]
    Micro,
    /// Unweighted mean of the per-class metrics.
    Macro,
}

impl FromStr for Average {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "micro" => Ok(Average::Micro),
            "macro" => Ok(Average::Macro),
            other => Err(Error::config(format!(
                "unknown average {other:?} (expected micro or macro)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    fn add(&mut self, other: &Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Ratios in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 from precision and recall, with 0/0 taken as 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl Metrics {
    pub fn from_counts(c: &Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        Metrics {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ClassReport {
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_class: BTreeMap<PunctClass, ClassReport>,
    /// Counts are always the sums of the per-class counts; metrics follow
    /// `average`.
    pub overall: ClassReport,
    pub average: Average,
}

/// Scores predicted labels against reference labels with micro averaging.
pub fn evaluate(predicted: &[PunctClass], reference: &[PunctClass]) -> Result<EvalReport> {
    evaluate_with(predicted, reference, Average::Micro)
}

pub fn evaluate_with(
    predicted: &[PunctClass],
    reference: &[PunctClass],
    average: Average,
) -> Result<EvalReport> {
    if predicted.len() != reference.len() {
        return Err(Error::LengthMismatch(format!(
            "{} predicted labels but {} reference labels",
            predicted.len(),
            reference.len()
        )));
    }
    let mut counts: BTreeMap<PunctClass, Counts> = PunctClass::MARKS
        .iter()
        .map(|c| (*c, Counts::default()))
        .collect();
    for (p, r) in predicted.iter().zip(reference) {
        if p == r {
            if let Some(c) = counts.get_mut(p) {
                c.tp += 1;
            }
            continue;
        }
        if let Some(c) = counts.get_mut(p) {
            c.fp += 1;
        }
        if let Some(c) = counts.get_mut(r) {
            c.fn_ += 1;
        }
    }
    let per_class: BTreeMap<PunctClass, ClassReport> = counts
        .into_iter()
        .map(|(class, counts)| {
            (
                class,
                ClassReport {
                    counts,
                    metrics: Metrics::from_counts(&counts),
                },
            )
        })
        .collect();
    let mut total = Counts::default();
    for r in per_class.values() {
        total.add(&r.counts);
    }
    let metrics = match average {
        Average::Micro => Metrics::from_counts(&total),
        Average::Macro => {
            let k = per_class.len() as f64;
            let mean =
                |f: fn(&Metrics) -> f64| per_class.values().map(|r| f(&r.metrics)).sum::<f64>() / k;
            Metrics {
                precision: mean(|m| m.precision),
                recall: mean(|m| m.recall),
                f1: mean(|m| m.f1),
            }
        }
    };
    Ok(EvalReport {
        per_class,
        overall: ClassReport {
            counts: total,
            metrics,
        },
        average,
    })
}

/// A ratio as a percentage rounded half-up to one decimal.
pub fn percent(value: f64) -> f64 {
    ((value * 1000.0) + 0.5 + 1e-9).floor() / 10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Records,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "records" => Ok(ReportFormat::Records),
            other => Err(Error::config(format!(
                "unknown format {other:?} (expected table or records)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    class: &'a str,
    #[serde(flatten)]
    report: &'a ClassReport,
}

impl EvalReport {
    fn rows(&self) -> Vec<(&'static str, &ClassReport)> {
        let mut rows: Vec<(&'static str, &ClassReport)> = self
            .per_class
            .iter()
            .map(|(c, r)| (c.wire_name(), r))
            .collect();
        rows.push(("OVERALL", &self.overall));
        rows
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Table => self.render_table(),
            ReportFormat::Records => self.render_records(),
        }
    }

    /// Fixed-width table with percentages to one decimal.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
            "class", "tp", "fp", "fn", "P", "R", "F1"
        );
        for (name, r) in self.rows() {
            let label = if name == "OVERALL" {
                match self.average {
                    Average::Micro => "OVERALL",
                    Average::Macro => "OVERALL*",
                }
            } else {
                name
            };
            let _ = writeln!(
                out,
                "{:<10} {:>7} {:>7} {:>7} {:>7.1} {:>7.1} {:>7.1}",
                label,
                r.counts.tp,
                r.counts.fp,
                r.counts.fn_,
                percent(r.metrics.precision),
                percent(r.metrics.recall),
                percent(r.metrics.f1)
            );
        }
        if self.average == Average::Macro {
            out.push_str("* macro average of per-class metrics\n");
        }
        out
    }

    /// One JSON object per class plus an `OVERALL` line; ratios unrounded.
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for (class, report) in self.rows() {
            out.push_str(
                &serde_json::to_string(&ReportRecord { class, report }).expect("record serializes"),
            );
            out.push('\n');
        }
        out
    }
}

/// Differences of one run against the baseline, in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub run: String,
    /// `None` for the overall row.
    pub class: Option<PunctClass>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: String,
    pub deltas: Vec<Delta>,
}

fn delta(run: &str, class: Option<PunctClass>, cand: &Metrics, base: &Metrics) -> Delta {
    Delta {
        run: run.to_string(),
        class,
        precision: (cand.precision - base.precision) * 100.0,
        recall: (cand.recall - base.recall) * 100.0,
        f1: (cand.f1 - base.f1) * 100.0,
    }
}

/// Absolute deltas of every run against the named baseline, per class and
/// overall, in input order.
pub fn compare_runs(reports: &[(String, EvalReport)], baseline: &str) -> Result<Comparison> {
    if reports.len() < 2 {
        return Err(Error::Input("comparison needs at least two reports".into()));
    }
    let (_, base) = reports
        .iter()
        .find(|(name, _)| name == baseline)
        .ok_or_else(|| Error::Input(format!("no report named {baseline:?}")))?;
    let mut deltas = Vec::new();
    for (name, report) in reports {
        if name == baseline {
            continue;
        }
        for (class, r) in &report.per_class {
            let b = base.per_class.get(class).copied().unwrap_or_default();
            deltas.push(delta(name, Some(*class), &r.metrics, &b.metrics));
        }
        deltas.push(delta(
            name,
            None,
            &report.overall.metrics,
            &base.overall.metrics,
        ));
    }
    Ok(Comparison {
        baseline: baseline.to_string(),
        deltas,
    })
}

impl Comparison {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "baseline: {}", self.baseline);
        let _ = writeln!(
            out,
            "{:<24} {:<10} {:>7} {:>7} {:>7}",
            "run", "class", "dP", "dR", "dF1"
        );
        for d in &self.deltas {
            let _ = writeln!(
                out,
                "{:<24} {:<10} {:>+7.1} {:>+7.1} {:>+7.1}",
                d.run,
                d.class.map_or("OVERALL", PunctClass::wire_name),
                d.precision,
                d.recall,
                d.f1
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PunctClass::*;

    #[test]
    fn perfect_prediction() {
        let labels = [O, Comma, Period, Question, O];
        let r = evaluate(&labels, &labels).unwrap();
        for c in r.per_class.values() {
            assert_eq!(c.metrics.f1, 1.0);
        }
        assert_eq!(r.overall.metrics.f1, 1.0);
    }

    #[test]
    fn all_o_prediction_scores_zero() {
        let r = evaluate(&[O, O, O], &[Comma, O, Period]).unwrap();
        assert_eq!(r.overall.metrics, Metrics::default());
        assert_eq!(r.overall.counts.fn_, 2);
        assert_eq!(r.per_class[&Question].metrics, Metrics::default());
    }

    #[test]
    fn hand_built_comma_case() {
        // tp = 2 (idx 0, 4), fp = 1 (idx 6), fn = 1 (idx 8).
        let pred = [Comma, O, O, O, Comma, O, Comma, O, O, O];
        let gold = [Comma, O, O, O, Comma, O, O, O, Comma, O];
        let r = evaluate(&pred, &gold).unwrap();
        let c = r.per_class[&Comma];
        assert_eq!((c.counts.tp, c.counts.fp, c.counts.fn_), (2, 1, 1));
        assert_eq!(percent(c.metrics.precision), 66.7);
        assert_eq!(percent(c.metrics.recall), 66.7);
        assert_eq!(percent(c.metrics.f1), 66.7);
    }

    #[test]
    fn confusion_between_marks() {
        let r = evaluate(&[Comma], &[Period]).unwrap();
        assert_eq!(r.per_class[&Comma].counts.fp, 1);
        assert_eq!(r.per_class[&Period].counts.fn_, 1);
    }

    #[test]
    fn macro_average_is_mean_of_classes() {
        let pred = [Comma, Comma, Period, O];
        let gold = [Comma, O, Period, Question];
        let r = evaluate_with(&pred, &gold, Average::Macro).unwrap();
        let mean_f1 = r.per_class.values().map(|c| c.metrics.f1).sum::<f64>() / 3.0;
        assert_eq!(r.overall.metrics.f1, mean_f1);
        assert_eq!(r.overall.counts.tp, 2);
    }

    #[test]
    fn length_mismatch() {
        let err = evaluate(&[O], &[O, O]).unwrap_err();
        assert_eq!(err.category().as_str(), "mismatch");
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(percent(2.0 / 3.0), 66.7);
        assert_eq!(percent(0.0125), 1.3);
        assert_eq!(percent(0.12345), 12.3);
        assert_eq!(percent(1.0), 100.0);
    }

    #[test]
    fn rendering() {
        let r = evaluate(&[Comma, O], &[Comma, Period]).unwrap();
        let table = r.render(ReportFormat::Table);
        assert!(table.lines().nth(1).unwrap().starts_with("COMMA"));
        assert!(table.contains("OVERALL"));
        let records = r.render(ReportFormat::Records);
        assert_eq!(records.lines().count(), 4);
        assert!(records.starts_with(r#"{"class":"COMMA","tp":1,"fp":0,"fn":0,"precision":1.0"#));
    }

    #[test]
    fn identical_reports_have_zero_deltas() {
        let r = evaluate(&[Comma, O], &[Comma, Period]).unwrap();
        let cmp = compare_runs(&[("a".into(), r.clone()), ("b".into(), r)], "a").unwrap();
        assert_eq!(cmp.deltas.len(), 4);
        assert!(cmp.deltas.iter().all(|d| d.f1 == 0.0 && d.precision == 0.0));
        assert!(compare_runs(&[("a".into(), evaluate(&[], &[]).unwrap())], "a").is_err());
    }
}
