//! Label set, probability vectors and the token stream being punctuated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of punctuation classes.
pub const NUM_CLASSES: usize = 4;

/// Tolerance on `|sum - 1|` when accepting a distribution from outside the engine.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Closed punctuation label set. The discriminant is the wire index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PunctClass {
    /// No punctuation after the word.
    O = 0,
    Comma = 1,
    Period = 2,
    Question = 3,
}

impl PunctClass {
    /// All classes in wire order.
    pub const ALL: [PunctClass; NUM_CLASSES] = [
        PunctClass::O,
        PunctClass::Comma,
        PunctClass::Period,
        PunctClass::Question,
    ];

    /// The punctuation classes, i.e. everything except `O`.
    pub const MARKS: [PunctClass; 3] =
        [PunctClass::Comma, PunctClass::Period, PunctClass::Question];

    /// Wire names in wire order, as they appear in file headers.
    pub const WIRE_NAMES: [&'static str; NUM_CLASSES] = ["O", "COMMA", "PERIOD", "QUESTION"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn wire_name(self) -> &'static str {
        Self::WIRE_NAMES[self.index()]
    }

    /// The mark rendered after a word carrying this label.
    pub fn mark(self) -> Option<char> {
        match self {
            PunctClass::O => None,
            PunctClass::Comma => Some(','),
            PunctClass::Period => Some('.'),
            PunctClass::Question => Some('?'),
        }
    }

    pub fn from_mark(c: char) -> Option<Self> {
        match c {
            ',' => Some(PunctClass::Comma),
            '.' => Some(PunctClass::Period),
            '?' => Some(PunctClass::Question),
            _ => None,
        }
    }
}

impl fmt::Display for PunctClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

impl FromStr for PunctClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Self::WIRE_NAMES
            .iter()
            .position(|name| *name == upper)
            .and_then(Self::from_index)
            .ok_or_else(|| Error::Input(format!("unknown punctuation class {s:?}")))
    }
}

/// A probability vector over [`PunctClass`], indexed in wire order.
///
/// Always non-negative and on the simplex: constructors either validate or
/// renormalize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution([f64; NUM_CLASSES]);

impl Distribution {
    pub const UNIFORM: Distribution = Distribution([0.25; NUM_CLASSES]);

    /// Accepts a probability row from an external source.
    ///
    /// Entries must be finite and non-negative and sum to 1 within
    /// [`SUM_TOLERANCE`]. Rows off by more than rounding error are
    /// renormalized; others are kept bit for bit so replays are exact.
    pub fn new(probs: [f64; NUM_CLASSES]) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Distribution(format!(
                "entry {bad} is negative or not finite in {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Distribution(format!(
                "entries sum to {sum}, expected 1 within {SUM_TOLERANCE}"
            )));
        }
        if (sum - 1.0).abs() <= 1e-12 {
            return Ok(Distribution(probs.map(|p| p.min(1.0))));
        }
        Ok(Self::normalized(probs, sum))
    }

    /// Builds a distribution from non-negative weights with a positive sum.
    pub(crate) fn from_weights(weights: [f64; NUM_CLASSES]) -> Self {
        let sum: f64 = weights.iter().sum();
        debug_assert!(sum > 0.0 && weights.iter().all(|w| *w >= 0.0));
        Self::normalized(weights, sum)
    }

    fn normalized(mut probs: [f64; NUM_CLASSES], sum: f64) -> Self {
        for p in probs.iter_mut() {
            *p = (*p / sum).min(1.0);
        }
        Distribution(probs)
    }

    pub fn one_hot(class: PunctClass) -> Self {
        let mut probs = [0.0; NUM_CLASSES];
        probs[class.index()] = 1.0;
        Distribution(probs)
    }

    /// Puts `confidence` on `class` and spreads the remainder uniformly over
    /// the other classes. `confidence` is clamped to `[0, 1]`.
    pub fn peaked(class: PunctClass, confidence: f64) -> Self {
        let c = confidence.clamp(0.0, 1.0);
        let rest = (1.0 - c) / (NUM_CLASSES - 1) as f64;
        let mut probs = [rest; NUM_CLASSES];
        probs[class.index()] = c;
        Distribution(probs)
    }

    pub fn probs(&self) -> &[f64; NUM_CLASSES] {
        &self.0
    }

    pub fn prob(&self, class: PunctClass) -> f64 {
        self.0[class.index()]
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.0
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }

    /// Convex mixture `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &Distribution, weight: f64) -> Distribution {
        let a = weight.clamp(0.0, 1.0);
        let mut out = [0.0; NUM_CLASSES];
        for (o, (p, q)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = (1.0 - a) * p + a * q;
        }
        Distribution::from_weights(out)
    }
}

/// An unpunctuated transcript, optionally with reference labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    tokens: Vec<String>,
    labels: Option<Vec<PunctClass>>,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        for (i, tok) in tokens.iter().enumerate() {
            check_token(i, tok)?;
        }
        Ok(TokenStream {
            tokens,
            labels: None,
        })
    }

    pub fn with_labels(tokens: Vec<String>, labels: Vec<PunctClass>) -> Result<Self> {
        if labels.len() != tokens.len() {
            return Err(Error::LengthMismatch(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        let mut stream = Self::new(tokens)?;
        stream.labels = Some(labels);
        Ok(stream)
    }

    /// Splits unpunctuated text on whitespace.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(text.split_whitespace().map(str::to_string).collect())
    }

    /// Parses punctuated text into words and reference labels: a trailing
    /// `,`, `.` or `?` on a word becomes that word's label.
    pub fn from_punctuated(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut labels = Vec::new();
        for word in text.split_whitespace() {
            let mut chars = word.chars();
            let last = chars.next_back();
            match last.and_then(PunctClass::from_mark) {
                Some(class) if !chars.as_str().is_empty() => {
                    tokens.push(chars.as_str().to_string());
                    labels.push(class);
                }
                _ => {
                    tokens.push(word.to_string());
                    labels.push(PunctClass::O);
                }
            }
        }
        Self::with_labels(tokens, labels)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn labels(&self) -> Option<&[PunctClass]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn check_token(index: usize, token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::Input(format!(
            "token {index} ({token:?}) is empty or contains whitespace"
        )));
    }
    if let Some(c) = token.chars().find(|c| PunctClass::from_mark(*c).is_some()) {
        return Err(Error::Input(format!(
            "token {index} ({token:?}) contains punctuation mark {c:?}; input must be unpunctuated"
        )));
    }
    Ok(())
}

/// Renders words with their labels: the label's mark is appended to the
/// word, words are separated by single spaces. Casing is left untouched.
pub fn render_punctuated(tokens: &[String], labels: &[PunctClass]) -> Result<String> {
    if tokens.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} tokens but {} labels",
            tokens.len(),
            labels.len()
        )));
    }
    let mut out = String::new();
    for (i, (tok, label)) in tokens.iter().zip(labels).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(tok);
        if let Some(mark) = label.mark() {
            out.push(mark);
        }
    }
    Ok(out)
}
