#![allow(dead_code)]

use maskcombine::{Distribution, ProbabilityProvider, PunctClass, Result, WindowSpec};
use rand::rngs::StdRng;
use rand::Rng;

/// Random marked transcript: each word carries a `·C`, `·P` or `·Q` marker
/// with the given probability; the markers double as reference labels.
pub fn marked_transcript(
    rng: &mut StdRng,
    len: usize,
    mark_rate: f64,
) -> (Vec<String>, Vec<PunctClass>) {
    let mut tokens = Vec::with_capacity(len);
    let mut labels = Vec::with_capacity(len);
    for i in 0..len {
        let label = if rng.gen_bool(mark_rate) {
            match rng.gen_range(0..10) {
                0..=5 => PunctClass::Comma,
                6..=8 => PunctClass::Period,
                _ => PunctClass::Question,
            }
        } else {
            PunctClass::O
        };
        let marker = match label {
            PunctClass::O => "",
            PunctClass::Comma => "·C",
            PunctClass::Period => "·P",
            PunctClass::Question => "·Q",
        };
        tokens.push(format!("w{i}{marker}"));
        labels.push(label);
    }
    (tokens, labels)
}

/// A provider whose every output is distinct per (window start, position),
/// so assembled contributions can be traced back to their window.
pub struct TracingProvider;

impl TracingProvider {
    pub fn dist(start: usize, pos: usize) -> Distribution {
        let x = ((start * 7919 + pos * 104_729) % 997) as f64 / 997.0;
        Distribution::new([x, 1.0 - x, 0.0, 0.0]).unwrap()
    }
}

impl ProbabilityProvider for TracingProvider {
    fn predict(&self, _tokens: &[String], spec: &WindowSpec) -> Result<Vec<Distribution>> {
        Ok((0..spec.len).map(|j| Self::dist(spec.start, j)).collect())
    }
}

/// Window layout written with signed offsets, independent of the library's
/// unsigned bookkeeping: nominal starts `k*s` (waive) or `k*s - m_l`
/// (causal), clipped to the transcript; the first window drops its left mask
/// under the waiver, the last one always drops its right mask.
pub fn oracle_windows(
    n_words: usize,
    w: usize,
    s: usize,
    ml: usize,
    mr: usize,
    causal: bool,
) -> Vec<(usize, usize, usize, usize)> {
    if n_words == 0 {
        return Vec::new();
    }
    if !causal && n_words <= w {
        return vec![(0, n_words, 0, 0)];
    }
    let (n, w, s, ml, mr) = (n_words as i64, w as i64, s as i64, ml as i64, mr as i64);
    let offset = if causal { -ml } else { 0 };
    let mut out = Vec::new();
    for k in 0.. {
        let nominal = offset + k * s;
        let lo = nominal.max(0);
        let hi = (nominal + w).min(n);
        let last = nominal + w >= n;
        let eff_ml = if !causal && k == 0 {
            0
        } else {
            ml - (lo - nominal)
        };
        let eff_mr = if last { 0 } else { mr };
        out.push((
            lo as usize,
            (hi - lo) as usize,
            eff_ml as usize,
            eff_mr as usize,
        ));
        if last {
            break;
        }
    }
    out
}
