//! Named decoding strategies expressed as [`DecodingConfig`]s.
//!
//! Earlier sliding-window schemes are special cases of mask-combine
//! decoding: double-overlap decoding is `s = w - (m_l + m_r)` with a single
//! prediction per word, overlapped-chunk split and merge picks the masks
//! from its cut parameters, and real-time decoding keeps one unmasked slot
//! per window at a fixed lookahead.

use std::fmt;

use crate::config::{Boundary, CombinerKind, DecodingConfig};
use crate::error::{Error, Result};
use crate::window::compute_stride;

/// Window size of the unmasked and masked baseline configurations.
pub const BASELINE_WINDOW: usize = 120;
/// Left mask of the masked baseline.
pub const BASELINE_MASK_LEFT: usize = 30;
/// Right mask of the masked baseline.
pub const BASELINE_MASK_RIGHT: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyPreset {
    /// One 120-word window per step, nothing masked.
    Unmasked,
    /// Double-overlap decoding with the baseline masks (w=120, m_l=30, m_r=15).
    Masked,
    DoubleOverlap {
        window: usize,
        mask_left: usize,
        mask_right: usize,
    },
    OverlappedChunk {
        window: usize,
        stride: usize,
        overlap_size: usize,
        min_words_cut: usize,
    },
    RealTime {
        window: usize,
        lookahead: usize,
    },
    Custom {
        config: DecodingConfig,
        n: usize,
    },
}

impl StrategyPreset {
    /// Stable preset names as accepted on the command line.
    pub const NAMES: [&'static str; 6] = [
        "unmasked",
        "masked",
        "double-overlap",
        "overlapped-chunk",
        "realtime",
        "custom",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyPreset::Unmasked => "unmasked",
            StrategyPreset::Masked => "masked",
            StrategyPreset::DoubleOverlap { .. } => "double-overlap",
            StrategyPreset::OverlappedChunk { .. } => "overlapped-chunk",
            StrategyPreset::RealTime { .. } => "realtime",
            StrategyPreset::Custom { .. } => "custom",
        }
    }

    /// The decoding configuration and overlap count this preset stands for.
    /// Presets that yield one prediction per word report `n = 1` and use the
    /// mean combiner, which is then the identity.
    pub fn resolve(&self) -> Result<(DecodingConfig, usize)> {
        match *self {
            StrategyPreset::Unmasked => Ok((preset_double_overlap(BASELINE_WINDOW, 0, 0)?, 1)),
            StrategyPreset::Masked => Ok((
                preset_double_overlap(BASELINE_WINDOW, BASELINE_MASK_LEFT, BASELINE_MASK_RIGHT)?,
                1,
            )),
            StrategyPreset::DoubleOverlap {
                window,
                mask_left,
                mask_right,
            } => Ok((preset_double_overlap(window, mask_left, mask_right)?, 1)),
            StrategyPreset::OverlappedChunk {
                window,
                stride,
                overlap_size,
                min_words_cut,
            } => Ok((
                preset_overlapped_chunk(stride, overlap_size, min_words_cut, window)?,
                1,
            )),
            StrategyPreset::RealTime { window, lookahead } => {
                Ok((preset_realtime(window, lookahead)?, 1))
            }
            StrategyPreset::Custom { config, n } => {
                if n == 0 {
                    return Err(Error::config("overlap n must be at least 1"));
                }
                Ok((config, n))
            }
        }
    }
}

impl fmt::Display for StrategyPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Double-overlap sliding-window decoding: masks as given and
/// `s = w - (m_l + m_r)`, so each word is predicted exactly once.
pub fn preset_double_overlap(
    window: usize,
    mask_left: usize,
    mask_right: usize,
) -> Result<DecodingConfig> {
    let stride = compute_stride(window, mask_left, mask_right, 1)?;
    DecodingConfig::new(window, stride, mask_left, mask_right, CombinerKind::Mean)
}

/// Overlapped-chunk split and merge: `m_r = min_words_cut`,
/// `m_l = overlap_size - min_words_cut`, stride unchanged.
pub fn preset_overlapped_chunk(
    stride: usize,
    overlap_size: usize,
    min_words_cut: usize,
    window: usize,
) -> Result<DecodingConfig> {
    if min_words_cut > overlap_size {
        return Err(Error::config(format!(
            "min_words_cut {min_words_cut} exceeds overlap_size {overlap_size}"
        )));
    }
    if overlap_size >= window {
        return Err(Error::config(format!(
            "overlap_size {overlap_size} must be smaller than the window ({window})"
        )));
    }
    DecodingConfig::new(
        window,
        stride,
        overlap_size - min_words_cut,
        min_words_cut,
        CombinerKind::Mean,
    )
}

/// Real-time decoding with `lookahead` words of right context:
/// `s = 1`, `m_l = w - l - 1`, `m_r = l`. Each window finalizes one word.
///
/// Uses [`Boundary::Causal`] so the leading words do not see further ahead
/// than `lookahead` either.
pub fn preset_realtime(window: usize, lookahead: usize) -> Result<DecodingConfig> {
    if lookahead >= window {
        return Err(Error::config(format!(
            "lookahead {lookahead} must be smaller than the window ({window})"
        )));
    }
    Ok(DecodingConfig::new(
        window,
        1,
        window - lookahead - 1,
        lookahead,
        CombinerKind::Mean,
    )?
    .with_boundary(Boundary::Causal))
}

/// Arbitrary masks with the stride chosen for `n` overlapping predictions.
pub fn build_custom(
    window: usize,
    mask_left: usize,
    mask_right: usize,
    n: usize,
    combiner: CombinerKind,
) -> Result<(DecodingConfig, usize)> {
    let stride = compute_stride(window, mask_left, mask_right, n)?;
    Ok((
        DecodingConfig::new(window, stride, mask_left, mask_right, combiner)?,
        n,
    ))
}

/// One (window, stride) cell of a sweep, evaluated at every listed lookahead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRun {
    pub id: String,
    pub window: usize,
    pub stride: usize,
    pub lookaheads: Vec<usize>,
}

/// Cartesian product of window and stride values in grid order (window
/// major). Each cell carries the full lookahead list used for averaging.
pub fn sweep_grid(
    windows: &[usize],
    strides: &[usize],
    lookaheads: &[usize],
) -> Result<Vec<SweepRun>> {
    if windows.is_empty() || strides.is_empty() || lookaheads.is_empty() {
        return Err(Error::config(
            "sweep grid needs at least one window, stride and lookahead value",
        ));
    }
    Ok(windows
        .iter()
        .flat_map(|&window| {
            strides.iter().map(move |&stride| SweepRun {
                id: format!("w{window}-s{stride}"),
                window,
                stride,
                lookaheads: lookaheads.to_vec(),
            })
        })
        .collect())
}
