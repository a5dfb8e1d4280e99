//! Window geometry: stride selection, window placement with masking, and
//! collection of the per-word distributions from overlapping windows.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::config::{Boundary, DecodingConfig};
use crate::error::{Error, Result};
use crate::types::Distribution;

/// Stride yielding at least `n` unmasked predictions per interior word:
/// `floor((w - (m_l + m_r)) / n)`.
pub fn compute_stride(
    window: usize,
    mask_left: usize,
    mask_right: usize,
    n: usize,
) -> Result<usize> {
    if window == 0 {
        return Err(Error::config("window size must be positive"));
    }
    if mask_left + mask_right >= window {
        return Err(Error::config(format!(
            "masks m_l={mask_left} + m_r={mask_right} must be smaller than the window ({window})"
        )));
    }
    let full = window - (mask_left + mask_right);
    if n == 0 || n > full {
        return Err(Error::config(format!(
            "overlap n={n} must be in 1..={full}, otherwise the stride would be 0"
        )));
    }
    Ok(full / n)
}

/// Placement of one window over the transcript and its effective masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start: usize,
    pub len: usize,
    pub mask_left: usize,
    pub mask_right: usize,
}

impl WindowSpec {
    /// Transcript positions whose predictions from this window are kept.
    pub fn unmasked(&self) -> Range<usize> {
        self.start + self.mask_left..self.start + self.len - self.mask_right
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn positions(&self) -> Range<usize> {
        self.start..self.end()
    }

    /// One line of a window plan: `start\tlen\tmask_left\tmask_right`.
    pub fn to_plan_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.start, self.len, self.mask_left, self.mask_right
        )
    }

    pub fn from_plan_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
        let [start, len, mask_left, mask_right] = fields.as_slice() else {
            return Err(Error::Input(format!(
                "plan line {line:?} must have 4 tab-separated fields"
            )));
        };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Input(format!("plan field {s:?}: {e}")))
        };
        let spec = WindowSpec {
            start: num(start)?,
            len: num(len)?,
            mask_left: num(mask_left)?,
            mask_right: num(mask_right)?,
        };
        if spec.mask_left + spec.mask_right >= spec.len {
            return Err(Error::Input(format!(
                "plan line {line:?} masks every position"
            )));
        }
        Ok(spec)
    }
}

/// Lays windows over a transcript of `transcript_len` words.
///
/// Starts advance by the configured stride and windows come back in
/// ascending start order. The last window is shortened to end at the
/// transcript end and keeps its right edge unmasked; how the leading words
/// are covered depends on [`Boundary`]. Every position is unmasked in at
/// least one window.
pub fn generate_windows(transcript_len: usize, config: &DecodingConfig) -> Vec<WindowSpec> {
    if transcript_len == 0 {
        return Vec::new();
    }
    match config.boundary() {
        Boundary::Waive => waived_windows(transcript_len, config),
        Boundary::Causal => causal_windows(transcript_len, config),
    }
}

fn waived_windows(n_words: usize, config: &DecodingConfig) -> Vec<WindowSpec> {
    let w = config.window();
    if n_words <= w {
        return vec![WindowSpec {
            start: 0,
            len: n_words,
            mask_left: 0,
            mask_right: 0,
        }];
    }
    let mut windows = Vec::with_capacity(n_words / config.stride() + 1);
    let mut start = 0;
    loop {
        let mask_left = if start == 0 { 0 } else { config.mask_left() };
        if start + w >= n_words {
            windows.push(WindowSpec {
                start,
                len: n_words - start,
                mask_left,
                mask_right: 0,
            });
            return windows;
        }
        windows.push(WindowSpec {
            start,
            len: w,
            mask_left,
            mask_right: config.mask_right(),
        });
        start += config.stride();
    }
}

fn causal_windows(n_words: usize, config: &DecodingConfig) -> Vec<WindowSpec> {
    let w = config.window();
    let mut windows = Vec::with_capacity(n_words / config.stride() + config.mask_left() + 1);
    // Window k nominally spans [k*s - m_l, k*s - m_l + w); offsets are kept
    // shifted by m_l to stay unsigned.
    let mut shifted = 0usize;
    loop {
        let clip = config.mask_left().saturating_sub(shifted);
        let start = shifted + clip - config.mask_left();
        let mask_left = config.mask_left() - clip;
        let nominal_end = shifted + w - config.mask_left();
        if nominal_end >= n_words {
            windows.push(WindowSpec {
                start,
                len: n_words - start,
                mask_left,
                mask_right: 0,
            });
            return windows;
        }
        windows.push(WindowSpec {
            start,
            len: w - clip,
            mask_left,
            mask_right: config.mask_right(),
        });
        shifted += config.stride();
    }
}

/// Word positions guaranteed to receive at least `n` distributions when the
/// stride was chosen as `compute_stride(w, m_l, m_r, n)`: everything after
/// the first `s_1 + m_l` and before the last `s_1 + m_r` words, with
/// `s_1 = w - (m_l + m_r)`.
pub fn interior_range(transcript_len: usize, config: &DecodingConfig) -> Range<usize> {
    let s1 = config.unmasked_width();
    let lo = s1 + config.mask_left();
    let hi = transcript_len.saturating_sub(s1 + config.mask_right());
    lo..hi.max(lo)
}

/// A window together with the model's distributions for all of its
/// positions, masked ones included.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPrediction {
    spec: WindowSpec,
    dists: Vec<Distribution>,
}

impl WindowPrediction {
    pub fn new(spec: WindowSpec, dists: Vec<Distribution>) -> Result<Self> {
        if dists.len() != spec.len {
            return Err(Error::Provider(format!(
                "window at {} has length {} but {} distributions were supplied",
                spec.start,
                spec.len,
                dists.len()
            )));
        }
        Ok(WindowPrediction { spec, dists })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn dists(&self) -> &[Distribution] {
        &self.dists
    }
}

/// One window's opinion about one word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub dist: Distribution,
    /// Index of the word inside the source window.
    pub pos: usize,
    /// Length of the source window.
    pub win_len: usize,
}

/// Collects, for every word, the distributions of all windows in which the
/// word is unmasked. Masked predictions are dropped.
///
/// Fails with a coverage error if a word ends up with no distribution.
pub fn assemble_per_word(
    predictions: &[WindowPrediction],
    transcript_len: usize,
) -> Result<Vec<Vec<Contribution>>> {
    let mut per_word: Vec<Vec<Contribution>> = vec![Vec::new(); transcript_len];
    for pred in predictions {
        let spec = pred.spec();
        if spec.end() > transcript_len || spec.mask_left + spec.mask_right >= spec.len {
            return Err(Error::Coverage(format!(
                "window {spec:?} does not fit a transcript of {transcript_len} words"
            )));
        }
        for word in spec.unmasked() {
            let pos = word - spec.start;
            per_word[word].push(Contribution {
                dist: pred.dists()[pos],
                pos,
                win_len: spec.len,
            });
        }
    }
    if let Some(word) = per_word.iter().position(Vec::is_empty) {
        return Err(Error::Coverage(format!(
            "word {word} is not unmasked in any window"
        )));
    }
    Ok(per_word)
}
