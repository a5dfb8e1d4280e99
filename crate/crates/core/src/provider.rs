//! Sources of per-window probability distributions.
//!
//! The engine never runs a model itself. A [`ProbabilityProvider`] answers
//! "what does the model say about each position of this window"; the
//! implementations here replay exported model output ([`FileProvider`]) or
//! compute deterministic fixtures ([`RuleProvider`], [`NoisyBoundaryProvider`]).

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Distribution, PunctClass, NUM_CLASSES, SUM_TOLERANCE};
use crate::window::WindowSpec;

/// What a provider can serve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Capabilities {
    pub max_window: Option<usize>,
    pub class_order: [&'static str; NUM_CLASSES],
}

impl Default for Capabilities {
    fn default() -> Self {
        Capabilities {
            max_window: None,
            class_order: PunctClass::WIRE_NAMES,
        }
    }
}

/// Per-position distributions for a window of tokens.
///
/// Implementations must be deterministic: the same tokens at the same
/// placement always yield the same distributions.
pub trait ProbabilityProvider: Send + Sync {
    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    /// Called once with the whole transcript before any window is requested.
    fn check_transcript(&self, _tokens: &[String]) -> Result<()> {
        Ok(())
    }

    /// `tokens` holds exactly the window's tokens (`spec.len` of them).
    fn predict(&self, tokens: &[String], spec: &WindowSpec) -> Result<Vec<Distribution>>;
}

impl<P: ProbabilityProvider + ?Sized> ProbabilityProvider for Box<P> {
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn check_transcript(&self, tokens: &[String]) -> Result<()> {
        (**self).check_transcript(tokens)
    }

    fn predict(&self, tokens: &[String], spec: &WindowSpec) -> Result<Vec<Distribution>> {
        (**self).predict(tokens, spec)
    }
}

/// 64-bit FNV-1a over the tokens joined with single spaces, as 16 hex digits.
pub fn transcript_hash(tokens: &[String]) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            feed(b" ");
        }
        feed(tok.as_bytes());
    }
    format!("{hash:016x}")
}

/// Marker-driven fixture provider.
///
/// A token ending in a rule's suffix gets the one-hot distribution of that
/// rule's class; every other token gets `O` with probability `confidence`
/// and the remainder spread evenly. With `min_right_context = k`, a marker
/// is only recognized when at least `k` tokens follow it inside the window,
/// which mimics a tagger that needs the next word to place punctuation.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleProvider {
    rules: Vec<(String, PunctClass)>,
    confidence: f64,
    min_right_context: usize,
}

impl Default for RuleProvider {
    fn default() -> Self {
        RuleProvider::new(
            vec![
                ("·C".to_string(), PunctClass::Comma),
                ("·P".to_string(), PunctClass::Period),
                ("·Q".to_string(), PunctClass::Question),
            ],
            1.0,
        )
    }
}

impl RuleProvider {
    pub fn new(mut rules: Vec<(String, PunctClass)>, confidence: f64) -> Self {
        // Longest suffix wins.
        rules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        RuleProvider {
            rules,
            confidence: confidence.clamp(0.0, 1.0),
            min_right_context: 0,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence.clamp(0.0, 1.0);
        self
    }

    pub fn with_min_right_context(mut self, k: usize) -> Self {
        self.min_right_context = k;
        self
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn min_right_context(&self) -> usize {
        self.min_right_context
    }

    /// The class a token's marker asks for, ignoring context.
    pub fn marked_class(&self, token: &str) -> Option<PunctClass> {
        self.rules
            .iter()
            .find(|(suffix, _)| token.ends_with(suffix.as_str()))
            .map(|(_, class)| *class)
    }

    /// Distribution for `token` given how many tokens follow it in view.
    pub fn distribution(&self, token: &str, right_context: usize) -> Distribution {
        match self.marked_class(token) {
            Some(class) if right_context >= self.min_right_context => Distribution::one_hot(class),
            _ => Distribution::peaked(PunctClass::O, self.confidence),
        }
    }

    /// Parses a rules file of `key=value` lines:
    ///
    /// ```text
    /// # comment
    /// confidence=0.7
    /// min_right_context=1
    /// rule=·P PERIOD
    /// ```
    ///
    /// Without any `rule` line the default markers `·C`, `·P`, `·Q` apply.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut rules = Vec::new();
        let mut confidence = 1.0;
        let mut min_right = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(origin, line_no, "expected key=value"));
            };
            let value = value.trim();
            match key.trim() {
                "confidence" => {
                    confidence = value
                        .parse::<f64>()
                        .ok()
                        .filter(|c| (0.0..=1.0).contains(c))
                        .ok_or_else(|| {
                            Error::parse(origin, line_no, "confidence must be a number in [0, 1]")
                        })?;
                }
                "min_right_context" => {
                    min_right = value.parse().map_err(|_| {
                        Error::parse(origin, line_no, "min_right_context must be an integer")
                    })?;
                }
                "rule" => {
                    let Some((suffix, class)) = value.rsplit_once(char::is_whitespace) else {
                        return Err(Error::parse(
                            origin,
                            line_no,
                            "rule needs `<suffix> <CLASS>`",
                        ));
                    };
                    let class: PunctClass = class
                        .parse()
                        .map_err(|e: Error| Error::parse(origin, line_no, e.to_string()))?;
                    rules.push((suffix.trim().to_string(), class));
                }
                other => {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        format!("unknown key {other:?}"),
                    ));
                }
            }
        }
        let base = if rules.is_empty() {
            RuleProvider::default()
        } else {
            RuleProvider::new(rules, 1.0)
        };
        Ok(base
            .with_confidence(confidence)
            .with_min_right_context(min_right))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

impl ProbabilityProvider for RuleProvider {
    fn predict(&self, tokens: &[String], spec: &WindowSpec) -> Result<Vec<Distribution>> {
        if tokens.len() != spec.len {
            return Err(Error::Provider(format!(
                "got {} tokens for a window of {}",
                tokens.len(),
                spec.len
            )));
        }
        Ok(tokens
            .iter()
            .enumerate()
            .map(|(j, tok)| self.distribution(tok, spec.len - 1 - j))
            .collect())
    }
}

/// Degrades a provider near window edges by mixing its output with the
/// uniform distribution.
///
/// At distance `d` from the nearer edge of a window of length `len` the
/// mixing weight is `edge_noise * max(0, 1 - d / h)` with half-width
/// `h = (len - 1) / 2`: full noise at the edges, none at the centre.
pub struct NoisyBoundaryProvider<P> {
    base: P,
    edge_noise: f64,
}

impl<P: ProbabilityProvider> NoisyBoundaryProvider<P> {
    pub fn new(base: P, edge_noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&edge_noise) {
            return Err(Error::config(format!(
                "edge_noise {edge_noise} must lie in [0, 1]"
            )));
        }
        Ok(NoisyBoundaryProvider { base, edge_noise })
    }

    pub fn mixing_weight(&self, pos: usize, len: usize) -> f64 {
        let d = pos.min(len - 1 - pos) as f64;
        let half = (len - 1) as f64 / 2.0;
        if half == 0.0 {
            return self.edge_noise;
        }
        self.edge_noise * (1.0 - d / half).max(0.0)
    }
}

impl<P: ProbabilityProvider> ProbabilityProvider for NoisyBoundaryProvider<P> {
    fn capabilities(&self) -> Capabilities {
        self.base.capabilities()
    }

    fn check_transcript(&self, tokens: &[String]) -> Result<()> {
        self.base.check_transcript(tokens)
    }

    fn predict(&self, tokens: &[String], spec: &WindowSpec) -> Result<Vec<Distribution>> {
        let mut dists = self.base.predict(tokens, spec)?;
        for (pos, dist) in dists.iter_mut().enumerate() {
            let weight = self.mixing_weight(pos, spec.len);
            if weight > 0.0 {
                *dist = dist.mix(&Distribution::UNIFORM, weight);
            }
        }
        Ok(dists)
    }
}

/// Window geometry an exporter was driven with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowParams {
    pub w: usize,
    pub s: usize,
    pub m_l: usize,
    pub m_r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsHeader {
    pub class_order: Vec<String>,
    pub transcript_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_params: Option<WindowParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsRecord {
    pub start: usize,
    pub tokens: Vec<String>,
    pub probs: Vec<[f64; NUM_CLASSES]>,
}

/// Exported model output: one JSON header line, then one JSON record per
/// window, sorted by start.
///
/// Rows are kept as read so that writing a parsed file reproduces it;
/// renormalization happens when a [`FileProvider`] serves them.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitsFile {
    pub header: LogitsHeader,
    pub records: Vec<LogitsRecord>,
}

pub(crate) fn check_class_order(order: &[String], origin: &str, line: usize) -> Result<()> {
    if order.len() != NUM_CLASSES
        || order
            .iter()
            .zip(PunctClass::WIRE_NAMES)
            .any(|(a, b)| a != b)
    {
        return Err(Error::parse(
            origin,
            line,
            format!(
                "class_order {order:?} does not match {:?}",
                PunctClass::WIRE_NAMES
            ),
        ));
    }
    Ok(())
}

pub(crate) fn check_row(row: &[f64; NUM_CLASSES], origin: &str, line: usize) -> Result<()> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::parse(
            origin,
            line,
            format!("row {row:?} has a negative or non-finite entry"),
        ));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::parse(
            origin,
            line,
            format!("row {row:?} sums to {sum}, outside 1 ± {SUM_TOLERANCE}"),
        ));
    }
    Ok(())
}

impl LogitsFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (header_line, raw) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header line"))?;
        let header: LogitsHeader = serde_json::from_str(raw)
            .map_err(|e| Error::parse(origin, header_line, format!("bad header: {e}")))?;
        check_class_order(&header.class_order, origin, header_line)?;

        let mut records: Vec<LogitsRecord> = Vec::new();
        for (line, raw) in lines {
            let rec: LogitsRecord = serde_json::from_str(raw)
                .map_err(|e| Error::parse(origin, line, format!("bad record: {e}")))?;
            if rec.tokens.len() != rec.probs.len() {
                return Err(Error::parse(
                    origin,
                    line,
                    format!(
                        "{} tokens but {} probability rows",
                        rec.tokens.len(),
                        rec.probs.len()
                    ),
                ));
            }
            for row in &rec.probs {
                check_row(row, origin, line)?;
            }
            if let Some(prev) = records.last() {
                if rec.start < prev.start {
                    return Err(Error::parse(
                        origin,
                        line,
                        format!(
                            "record start {} precedes {}; records must be sorted",
                            rec.start, prev.start
                        ),
                    ));
                }
            }
            records.push(rec);
        }
        Ok(LogitsFile { header, records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Captures a provider's output over a window plan, the way an exporter
    /// would.
    pub fn capture(
        provider: &dyn ProbabilityProvider,
        tokens: &[String],
        plan: &[WindowSpec],
        window_params: Option<WindowParams>,
    ) -> Result<Self> {
        let mut records = Vec::with_capacity(plan.len());
        for spec in plan {
            if spec.end() > tokens.len() {
                return Err(Error::Input(format!(
                    "window {spec:?} exceeds transcript of {} words",
                    tokens.len()
                )));
            }
            let window = &tokens[spec.positions()];
            let dists = provider.predict(window, spec)?;
            records.push(LogitsRecord {
                start: spec.start,
                tokens: window.to_vec(),
                probs: dists.iter().map(|d| *d.probs()).collect(),
            });
        }
        records.sort_by_key(|r| r.start);
        Ok(LogitsFile {
            header: LogitsHeader {
                class_order: PunctClass::WIRE_NAMES
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                transcript_hash: transcript_hash(tokens),
                window_params,
            },
            records,
        })
    }
}

/// Serves the windows stored in a [`LogitsFile`], keyed by `(start, len)`.
#[derive(Debug, Clone)]
pub struct FileProvider {
    transcript_hash: String,
    windows: HashMap<(usize, usize), (Vec<String>, Vec<Distribution>)>,
    max_window: Option<usize>,
}

impl FileProvider {
    pub fn from_logits(file: LogitsFile) -> Result<Self> {
        let mut windows = HashMap::with_capacity(file.records.len());
        for rec in file.records {
            let dists = rec
                .probs
                .iter()
                .map(|row| Distribution::new(*row))
                .collect::<Result<Vec<_>>>()?;
            windows.insert((rec.start, rec.tokens.len()), (rec.tokens, dists));
        }
        Ok(FileProvider {
            transcript_hash: file.header.transcript_hash,
            max_window: file.header.window_params.map(|p| p.w),
            windows,
        })
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::from_logits(LogitsFile::read(path)?)
    }
}

impl ProbabilityProvider for FileProvider {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            max_window: self.max_window,
            ..Capabilities::default()
        }
    }

    fn check_transcript(&self, tokens: &[String]) -> Result<()> {
        let actual = transcript_hash(tokens);
        if actual != self.transcript_hash {
            return Err(Error::HashMismatch {
                expected: self.transcript_hash.clone(),
                actual,
            });
        }
        Ok(())
    }

    fn predict(&self, tokens: &[String], spec: &WindowSpec) -> Result<Vec<Distribution>> {
        let (stored, dists) =
            self.windows
                .get(&(spec.start, spec.len))
                .ok_or(Error::MissingWindow {
                    start: spec.start,
                    len: spec.len,
                })?;
        if stored.as_slice() != tokens {
            return Err(Error::Provider(format!(
                "tokens of stored window at {} differ from the transcript",
                spec.start
            )));
        }
        Ok(dists.clone())
    }
}

/// Where window distributions come from, as written on the command line and
/// in run manifests.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSource {
    /// `file:PATH`, a [`LogitsFile`].
    File(PathBuf),
    /// `rule:PATH`, a [`RuleProvider`] rules file; `rule:` alone uses the
    /// default markers.
    Rule(Option<PathBuf>),
    /// `noisy:WEIGHT:<inner>`, a [`NoisyBoundaryProvider`] around `inner`.
    Noisy(f64, Box<ProviderSource>),
}

impl ProviderSource {
    pub fn open(&self) -> Result<Box<dyn ProbabilityProvider>> {
        Ok(match self {
            ProviderSource::File(path) => Box::new(FileProvider::open(path)?),
            ProviderSource::Rule(None) => Box::new(RuleProvider::default()),
            ProviderSource::Rule(Some(path)) => Box::new(RuleProvider::from_path(path)?),
            ProviderSource::Noisy(weight, inner) => {
                Box::new(NoisyBoundaryProvider::new(inner.open()?, *weight)?)
            }
        })
    }

    /// Substitutes `{w}`, `{s}` and `{l}` placeholders in paths.
    pub fn instantiate(&self, window: usize, stride: usize, lookahead: usize) -> ProviderSource {
        let fill = |p: &PathBuf| {
            PathBuf::from(
                p.to_string_lossy()
                    .replace("{w}", &window.to_string())
                    .replace("{s}", &stride.to_string())
                    .replace("{l}", &lookahead.to_string()),
            )
        };
        match self {
            ProviderSource::File(p) => ProviderSource::File(fill(p)),
            ProviderSource::Rule(p) => ProviderSource::Rule(p.as_ref().map(fill)),
            ProviderSource::Noisy(w, inner) => {
                ProviderSource::Noisy(*w, Box::new(inner.instantiate(window, stride, lookahead)))
            }
        }
    }

    /// The rule provider behind this source, when there is one and no file
    /// is involved.
    pub fn rule_provider(&self) -> Result<Option<RuleProvider>> {
        match self {
            ProviderSource::Rule(None) => Ok(Some(RuleProvider::default())),
            ProviderSource::Rule(Some(path)) => RuleProvider::from_path(path).map(Some),
            _ => Ok(None),
        }
    }
}

impl FromStr for ProviderSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::config("file: provider needs a path"));
            }
            return Ok(ProviderSource::File(PathBuf::from(path)));
        }
        if let Some(path) = s.strip_prefix("rule:") {
            return Ok(ProviderSource::Rule(
                (!path.is_empty()).then(|| PathBuf::from(path)),
            ));
        }
        if let Some(rest) = s.strip_prefix("noisy:") {
            let (weight, inner) = rest
                .split_once(':')
                .ok_or_else(|| Error::config("noisy provider needs `noisy:WEIGHT:<provider>`"))?;
            let weight: f64 = weight
                .parse()
                .map_err(|_| Error::config(format!("bad edge noise {weight:?}")))?;
            return Ok(ProviderSource::Noisy(weight, Box::new(inner.parse()?)));
        }
        Err(Error::config(format!(
            "unknown provider {s:?} (expected file:PATH, rule:PATH or noisy:WEIGHT:<provider>)"
        )))
    }
}

impl fmt::Display for ProviderSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderSource::File(p) => write!(f, "file:{}", p.display()),
            ProviderSource::Rule(None) => f.write_str("rule:"),
            ProviderSource::Rule(Some(p)) => write!(f, "rule:{}", p.display()),
            ProviderSource::Noisy(w, inner) => write!(f, "noisy:{w}:{inner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn spec(start: usize, len: usize) -> WindowSpec {
        WindowSpec {
            start,
            len,
            mask_left: 0,
            mask_right: 0,
        }
    }

    #[test]
    fn fnv_reference_values() {
        // Independently computed FNV-1a 64 digests.
        assert_eq!(transcript_hash(&[]), "cbf29ce484222325");
        assert_eq!(
            transcript_hash(&toks(&["hello", "world"])),
            "779a65e7023cd2e7"
        );
        assert_eq!(transcript_hash(&toks(&["a", "b", "c"])), "69cf480885ad45af");
    }

    #[test]
    fn rule_provider_examples() {
        let p = RuleProvider::default();
        let out = p
            .predict(&toks(&["hello", "world·P"]), &spec(0, 2))
            .unwrap();
        assert_eq!(out[0], Distribution::one_hot(PunctClass::O));
        assert_eq!(out[1], Distribution::one_hot(PunctClass::Period));

        let soft = RuleProvider::default().with_confidence(0.7);
        let d = soft.distribution("hello", 5);
        for (got, want) in d.probs().iter().zip([0.7, 0.1, 0.1, 0.1]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rule_provider_needs_right_context_when_asked() {
        let p = RuleProvider::default().with_min_right_context(1);
        let out = p.predict(&toks(&["a·C", "b·C"]), &spec(0, 2)).unwrap();
        assert_eq!(out[0], Distribution::one_hot(PunctClass::Comma));
        assert_eq!(out[1], Distribution::one_hot(PunctClass::O));
    }

    #[test]
    fn rules_file_parses() {
        let text =
            "# fixture\nconfidence=0.8\nmin_right_context=2\nrule=!! QUESTION\nrule=_end PERIOD\n";
        let p = RuleProvider::parse(text, "rules").unwrap();
        assert_eq!(p.confidence(), 0.8);
        assert_eq!(p.min_right_context(), 2);
        assert_eq!(p.marked_class("what!!"), Some(PunctClass::Question));
        assert_eq!(p.marked_class("x·P"), None);
        let err = RuleProvider::parse("rule=x COLON\n", "rules").unwrap_err();
        assert!(err.to_string().contains("rules:1"));
    }

    #[test]
    fn noisy_provider_examples() {
        let words = toks(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        let s = spec(0, 8);
        let base = RuleProvider::default();
        let clean = NoisyBoundaryProvider::new(RuleProvider::default(), 0.0).unwrap();
        assert_eq!(
            clean.predict(&words, &s).unwrap(),
            base.predict(&words, &s).unwrap()
        );

        let full = NoisyBoundaryProvider::new(RuleProvider::default(), 1.0).unwrap();
        let out = full.predict(&words, &s).unwrap();
        assert_eq!(out[0], Distribution::UNIFORM);
        assert_eq!(out[7], Distribution::UNIFORM);
        assert!((full.mixing_weight(3, 8) - (1.0 - 3.0 / 3.5)).abs() < 1e-15);
        assert_eq!(full.mixing_weight(4, 9), 0.0);
        assert_eq!(full.mixing_weight(0, 1), 1.0);
        let out9 = full.predict(&toks(&["a"; 9]), &spec(0, 9)).unwrap();
        assert_eq!(out9[4], Distribution::one_hot(PunctClass::O));
        assert!(NoisyBoundaryProvider::new(RuleProvider::default(), 1.5).is_err());
    }

    #[test]
    fn file_provider_serves_and_rejects() {
        let words = toks(&["x", "y·C", "z"]);
        let file =
            LogitsFile::capture(&RuleProvider::default(), &words, &[spec(0, 3)], None).unwrap();
        let provider = FileProvider::from_logits(file).unwrap();
        provider.check_transcript(&words).unwrap();
        let out = provider.predict(&words, &spec(0, 3)).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[1], Distribution::one_hot(PunctClass::Comma));
        let missing = provider.predict(&words[..2], &spec(5, 10)).unwrap_err();
        assert_eq!(missing.category().as_str(), "geometry");
        let other = toks(&["x", "y", "z"]);
        assert_eq!(
            provider
                .check_transcript(&other)
                .unwrap_err()
                .category()
                .as_str(),
            "integrity"
        );
    }

    #[test]
    fn logits_file_rejects_bad_rows_with_line_numbers() {
        let header = r#"{"class_order":["O","COMMA","PERIOD","QUESTION"],"transcript_hash":"00"}"#;
        let good = r#"{"start":0,"tokens":["a"],"probs":[[1.0,0.0,0.0,0.0]]}"#;
        let bad = r#"{"start":1,"tokens":["b"],"probs":[[0.5,0.0,0.0,0.0]]}"#;
        let text = format!("{header}\n{good}\n{bad}\n");
        let err = LogitsFile::parse(&text, "f.jsonl").unwrap_err();
        assert!(err.to_string().starts_with("f.jsonl:3:"), "{err}");

        let wrong_order =
            r#"{"class_order":["O","PERIOD","COMMA","QUESTION"],"transcript_hash":"00"}"#;
        assert!(LogitsFile::parse(wrong_order, "f").is_err());

        let unsorted = format!(
            "{header}\n{}\n{good}\n",
            r#"{"start":4,"tokens":["a"],"probs":[[1.0,0.0,0.0,0.0]]}"#
        );
        assert!(LogitsFile::parse(&unsorted, "f").is_err());
    }

    #[test]
    fn logits_file_round_trips_decimal_strings() {
        let text = concat!(
            r#"{"class_order":["O","COMMA","PERIOD","QUESTION"],"transcript_hash":"779a65e7023cd2e7","window_params":{"w":2,"s":2,"m_l":0,"m_r":0}}"#,
            "\n",
            r#"{"start":0,"tokens":["hello","world"],"probs":[[0.7,0.1,0.1,0.1],[0.0123,0.3333333,0.5,0.1543667]]}"#,
            "\n"
        );
        let file = LogitsFile::parse(text, "f").unwrap();
        assert_eq!(file.to_jsonl(), text);
    }

    #[test]
    fn provider_sources_parse_and_print() {
        for s in [
            "file:out/a.jsonl",
            "rule:",
            "rule:r.txt",
            "noisy:0.6:rule:r.txt",
        ] {
            let src: ProviderSource = s.parse().unwrap();
            assert_eq!(src.to_string(), s);
        }
        assert!("model:bert".parse::<ProviderSource>().is_err());
        let tpl: ProviderSource = "file:runs/w{w}_s{s}_l{l}.jsonl".parse().unwrap();
        assert_eq!(
            tpl.instantiate(30, 5, 2).to_string(),
            "file:runs/w30_s5_l2.jsonl"
        );
    }
}
