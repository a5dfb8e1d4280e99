//! Inputs for the sequence-classification approach.
//!
//! Each word gets its own instance: the transcript up to the word plus `l`
//! lookahead tokens, with a `[PUNCT]` sentinel inserted right after the word
//! and tokens removed from the left until the instance fits the window. A
//! classifier then predicts one distribution per instance.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::combine::decode_label;
use crate::error::{Error, Result};
use crate::provider::{
    check_class_order, check_row, transcript_hash, ProviderSource, RuleProvider,
};
use crate::types::{Distribution, PunctClass, TokenStream, NUM_CLASSES};

/// The sentinel marking where punctuation is to be predicted.
pub const PUNCT_TOKEN: &str = "[PUNCT]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationInstance {
    pub word_index: usize,
    pub tokens: Vec<String>,
    pub punct_index: usize,
    /// Requested lookahead; the instance may hold fewer right-context tokens
    /// near the end of the transcript.
    #[serde(skip)]
    pub lookahead: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PunctClass>,
}

impl ClassificationInstance {
    /// Tokens after the sentinel.
    pub fn right_context(&self) -> &[String] {
        &self.tokens[self.punct_index + 1..]
    }

    /// The word being punctuated, i.e. the sentinel's left neighbour.
    pub fn word(&self) -> Option<&str> {
        self.punct_index
            .checked_sub(1)
            .map(|i| self.tokens[i].as_str())
    }

    /// One line-delimited JSON record: `{word_index, tokens, punct_index, target?}`.
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

/// Builds the instance for `tokens[word_index]` with `lookahead` tokens of
/// right context and at most `window` tokens in total.
pub fn build_instance(
    tokens: &[String],
    word_index: usize,
    lookahead: usize,
    window: usize,
) -> Result<ClassificationInstance> {
    if window < 2 {
        return Err(Error::config(format!(
            "window {window} cannot hold the sentinel plus one token"
        )));
    }
    if word_index >= tokens.len() {
        return Err(Error::Input(format!(
            "word index {word_index} outside a transcript of {} words",
            tokens.len()
        )));
    }
    let end = (word_index + 1 + lookahead).min(tokens.len());
    let right = end - word_index - 1;
    if right + 2 > window {
        return Err(Error::config(format!(
            "window {window} cannot hold the word, the sentinel and {right} lookahead tokens"
        )));
    }
    let total = end + 1;
    let drop = total.saturating_sub(window);
    let mut out = Vec::with_capacity(total - drop);
    out.extend_from_slice(&tokens[drop..=word_index]);
    let punct_index = out.len();
    out.push(PUNCT_TOKEN.to_string());
    out.extend_from_slice(&tokens[word_index + 1..end]);
    Ok(ClassificationInstance {
        word_index,
        tokens: out,
        punct_index,
        lookahead,
        target: None,
    })
}

/// One instance per word, in order, with reference labels attached when the
/// stream has them.
pub fn stream_instances(
    stream: &TokenStream,
    lookahead: usize,
    window: usize,
) -> Result<Vec<ClassificationInstance>> {
    (0..stream.len())
        .map(|i| {
            let mut inst = build_instance(stream.tokens(), i, lookahead, window)?;
            inst.target = stream.labels().map(|labels| labels[i]);
            Ok(inst)
        })
        .collect()
}

/// A sentence-level classifier: one distribution per instance.
pub trait InstanceProvider: Send + Sync {
    fn check_transcript(&self, _tokens: &[String]) -> Result<()> {
        Ok(())
    }

    fn classify(&self, instance: &ClassificationInstance) -> Result<Distribution>;
}

impl<P: InstanceProvider + ?Sized> InstanceProvider for Box<P> {
    fn check_transcript(&self, tokens: &[String]) -> Result<()> {
        (**self).check_transcript(tokens)
    }

    fn classify(&self, instance: &ClassificationInstance) -> Result<Distribution> {
        (**self).classify(instance)
    }
}

/// Applies a [`RuleProvider`]'s markers to the sentinel's left neighbour.
#[derive(Debug, Clone, Default)]
pub struct RuleInstanceProvider {
    rules: RuleProvider,
}

impl RuleInstanceProvider {
    pub fn new(rules: RuleProvider) -> Self {
        RuleInstanceProvider { rules }
    }
}

impl InstanceProvider for RuleInstanceProvider {
    fn classify(&self, instance: &ClassificationInstance) -> Result<Distribution> {
        let word = instance
            .word()
            .ok_or_else(|| Error::Provider("instance has no word before the sentinel".into()))?;
        Ok(self
            .rules
            .distribution(word, instance.right_context().len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationHeader {
    pub class_order: Vec<String>,
    pub transcript_hash: String,
    pub lookahead: usize,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub word_index: usize,
    pub probs: [f64; NUM_CLASSES],
}

/// Exported classifier output: a JSON header line, then one record per
/// instance sorted by word index.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationFile {
    pub header: ClassificationHeader,
    pub records: Vec<ClassificationRecord>,
}

impl ClassificationFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (header_line, raw) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header line"))?;
        let header: ClassificationHeader = serde_json::from_str(raw)
            .map_err(|e| Error::parse(origin, header_line, format!("bad header: {e}")))?;
        check_class_order(&header.class_order, origin, header_line)?;
        let mut records: Vec<ClassificationRecord> = Vec::new();
        for (line, raw) in lines {
            let rec: ClassificationRecord = serde_json::from_str(raw)
                .map_err(|e| Error::parse(origin, line, format!("bad record: {e}")))?;
            check_row(&rec.probs, origin, line)?;
            if records
                .last()
                .is_some_and(|prev| rec.word_index <= prev.word_index)
            {
                return Err(Error::parse(
                    origin,
                    line,
                    "records must be sorted by strictly increasing word_index",
                ));
            }
            records.push(rec);
        }
        Ok(ClassificationFile { header, records })
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

    /// Records a classifier's output over every instance of a transcript.
    pub fn capture(
        provider: &dyn InstanceProvider,
        tokens: &[String],
        lookahead: usize,
        window: usize,
    ) -> Result<Self> {
        let records = (0..tokens.len())
            .map(|i| {
                let inst = build_instance(tokens, i, lookahead, window)?;
                Ok(ClassificationRecord {
                    word_index: i,
                    probs: *provider.classify(&inst)?.probs(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassificationFile {
            header: ClassificationHeader {
                class_order: PunctClass::WIRE_NAMES
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                transcript_hash: transcript_hash(tokens),
                lookahead,
                window,
            },
            records,
        })
    }
}

/// Serves a [`ClassificationFile`] by word index.
#[derive(Debug, Clone)]
pub struct ClassificationFileProvider {
    header: ClassificationHeader,
    dists: HashMap<usize, Distribution>,
}

impl ClassificationFileProvider {
    pub fn from_file(file: ClassificationFile) -> Result<Self> {
        let dists = file
            .records
            .iter()
            .map(|r| Ok((r.word_index, Distribution::new(r.probs)?)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(ClassificationFileProvider {
            header: file.header,
            dists,
        })
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::from_file(ClassificationFile::read(path)?)
    }
}

impl InstanceProvider for ClassificationFileProvider {
    fn check_transcript(&self, tokens: &[String]) -> Result<()> {
        let actual = transcript_hash(tokens);
        if actual != self.header.transcript_hash {
            return Err(Error::HashMismatch {
                expected: self.header.transcript_hash.clone(),
                actual,
            });
        }
        Ok(())
    }

    fn classify(&self, instance: &ClassificationInstance) -> Result<Distribution> {
        if instance.lookahead != self.header.lookahead {
            return Err(Error::Provider(format!(
                "file was exported with lookahead {}, instance asks for {}",
                self.header.lookahead, instance.lookahead
            )));
        }
        self.dists
            .get(&instance.word_index)
            .copied()
            .ok_or_else(|| Error::Provider(format!("no record for word {}", instance.word_index)))
    }
}

/// Opens a sentence-level provider: `file:` sources hold a
/// [`ClassificationFile`], `rule:` sources apply marker rules.
pub fn open_instance_provider(source: &ProviderSource) -> Result<Box<dyn InstanceProvider>> {
    match source {
        ProviderSource::File(path) => Ok(Box::new(ClassificationFileProvider::open(path)?)),
        ProviderSource::Rule(_) => Ok(Box::new(RuleInstanceProvider::new(
            source.rule_provider()?.unwrap_or_default(),
        ))),
        ProviderSource::Noisy(..) => Err(Error::config(
            "edge noise applies to window providers, not to classification",
        )),
    }
}

/// Per-word output of classification decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedStream {
    pub distributions: Vec<Distribution>,
    pub labels: Vec<PunctClass>,
}

/// Classifies every word's instance and takes the argmax.
pub fn decode_classification(
    provider: &dyn InstanceProvider,
    tokens: &[String],
    lookahead: usize,
    window: usize,
) -> Result<ClassifiedStream> {
    if tokens.is_empty() {
        return Ok(ClassifiedStream {
            distributions: Vec::new(),
            labels: Vec::new(),
        });
    }
    provider.check_transcript(tokens)?;
    let distributions = (0..tokens.len())
        .map(|i| {
            let inst = build_instance(tokens, i, lookahead, window)?;
            provider
                .classify(&inst)
                .map_err(|e| Error::Provider(format!("word {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassifiedStream {
        labels: distributions.iter().map(decode_label).collect(),
        distributions,
    })
}
