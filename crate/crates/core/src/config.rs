use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Rule used to fuse the distributions collected at one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CombinerKind {
    #[default]
    Mean,
    EntropyWeighted,
    Hamming,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 3] = [
        CombinerKind::Mean,
        CombinerKind::EntropyWeighted,
        CombinerKind::Hamming,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CombinerKind::Mean => "mean",
            CombinerKind::EntropyWeighted => "entropy",
            CombinerKind::Hamming => "hamming",
        }
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CombinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(CombinerKind::Mean),
            "entropy" | "entropy-weighted" | "entropy_weighted" | "entropyweighted" => {
                Ok(CombinerKind::EntropyWeighted)
            }
            "hamming" => Ok(CombinerKind::Hamming),
            other => Err(Error::config(format!(
                "unknown combiner {other:?} (expected mean, entropy or hamming)"
            ))),
        }
    }
}

/// How windows touching the start of the transcript are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Windows start at 0, s, 2s, ...; the first window's left mask is
    /// dropped so the leading words are covered.
    #[default]
    Waive,
    /// Windows start at -m_l, s - m_l, ... and are clipped at 0, so a word
    /// never sees more right context than a full-width window would give it.
    /// Required for lookahead-constrained decoding.
    Causal,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Waive => "waive",
            Boundary::Causal => "causal",
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "waive" => Ok(Boundary::Waive),
            "causal" => Ok(Boundary::Causal),
            other => Err(Error::config(format!(
                "unknown boundary policy {other:?} (expected waive or causal)"
            ))),
        }
    }
}

/// Window size, stride, masks and combiner: everything that determines a decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodingConfig {
    window: usize,
    stride: usize,
    mask_left: usize,
    mask_right: usize,
    combiner: CombinerKind,
    boundary: Boundary,
}

impl DecodingConfig {
    pub fn new(
        window: usize,
        stride: usize,
        mask_left: usize,
        mask_right: usize,
        combiner: CombinerKind,
    ) -> Result<Self> {
        let cfg = DecodingConfig {
            window,
            stride,
            mask_left,
            mask_right,
            combiner,
            boundary: Boundary::Waive,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_combiner(mut self, combiner: CombinerKind) -> Self {
        self.combiner = combiner;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("window size must be positive"));
        }
        if self.mask_left + self.mask_right >= self.window {
            return Err(Error::config(format!(
                "masks m_l={} + m_r={} leave no unmasked position in a window of {}",
                self.mask_left, self.mask_right, self.window
            )));
        }
        let full = self.unmasked_width();
        if self.stride == 0 || self.stride > full {
            return Err(Error::config(format!(
                "stride {} must be in 1..={full} (w - m_l - m_r)",
                self.stride
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn mask_left(&self) -> usize {
        self.mask_left
    }

    pub fn mask_right(&self) -> usize {
        self.mask_right
    }

    pub fn combiner(&self) -> CombinerKind {
        self.combiner
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `w - (m_l + m_r)`: the stride giving exactly one prediction per word.
    pub fn unmasked_width(&self) -> usize {
        self.window - (self.mask_left + self.mask_right)
    }
}

impl fmt::Display for DecodingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "w={} s={} m_l={} m_r={} combiner={} boundary={}",
            self.window,
            self.stride,
            self.mask_left,
            self.mask_right,
            self.combiner,
            self.boundary.as_str()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_full_mask() {
        assert!(DecodingConfig::new(10, 1, 5, 5, CombinerKind::Mean).is_err());
        assert!(DecodingConfig::new(10, 1, 4, 5, CombinerKind::Mean).is_ok());
    }

    #[test]
    fn rejects_skipping_stride() {
        assert!(DecodingConfig::new(20, 12, 3, 6, CombinerKind::Mean).is_err());
        assert!(DecodingConfig::new(20, 11, 3, 6, CombinerKind::Mean).is_ok());
        assert!(DecodingConfig::new(20, 0, 3, 6, CombinerKind::Mean).is_err());
    }

    #[test]
    fn combiner_parses_case_insensitively() {
        assert_eq!("MEAN".parse::<CombinerKind>().unwrap(), CombinerKind::Mean);
        assert_eq!(
            "Entropy".parse::<CombinerKind>().unwrap(),
            CombinerKind::EntropyWeighted
        );
        assert_eq!(
            "Hamming".parse::<CombinerKind>().unwrap(),
            CombinerKind::Hamming
        );
        assert!("vote".parse::<CombinerKind>().is_err());
    }
}
