//! Mask-combine decoding of a whole transcript with a tagging provider.

use crate::combine::{combine, decode_label};
use crate::config::DecodingConfig;
use crate::error::{Error, Result};
use crate::provider::ProbabilityProvider;
use crate::types::{Distribution, PunctClass};
use crate::window::{assemble_per_word, generate_windows, WindowPrediction, WindowSpec};

/// Result of decoding one transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub windows: Vec<WindowSpec>,
    /// Number of distributions fused at each word.
    pub overlap: Vec<usize>,
    pub distributions: Vec<Distribution>,
    pub labels: Vec<PunctClass>,
}

/// Runs every window of the plan through `provider`, fuses the unmasked
/// predictions at each word with the configured combiner and takes the
/// argmax.
pub fn decode(
    tokens: &[String],
    config: &DecodingConfig,
    provider: &dyn ProbabilityProvider,
) -> Result<Decoded> {
    if tokens.is_empty() {
        return Ok(Decoded {
            windows: Vec::new(),
            overlap: Vec::new(),
            distributions: Vec::new(),
            labels: Vec::new(),
        });
    }
    provider.check_transcript(tokens)?;
    if let Some(max) = provider.capabilities().max_window {
        if config.window() > max {
            return Err(Error::config(format!(
                "window {} exceeds the provider's maximum of {max}",
                config.window()
            )));
        }
    }
    let windows = generate_windows(tokens.len(), config);
    let predictions = windows
        .iter()
        .map(|spec| {
            let dists = provider.predict(&tokens[spec.positions()], spec)?;
            WindowPrediction::new(*spec, dists)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_word = assemble_per_word(&predictions, tokens.len())?;
    let distributions = per_word
        .iter()
        .map(|contribs| combine(config.combiner(), contribs))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decoded {
        overlap: per_word.iter().map(Vec::len).collect(),
        labels: distributions.iter().map(decode_label).collect(),
        distributions,
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CombinerKind;
    use crate::provider::RuleProvider;
    use crate::types::TokenStream;

    #[test]
    fn rule_provider_places_marked_periods() {
        let text = "we met·P then we left·C quickly did you·Q";
        let stream = TokenStream::from_text(text).unwrap();
        let config = DecodingConfig::new(4, 2, 1, 1, CombinerKind::Mean).unwrap();
        let out = decode(stream.tokens(), &config, &RuleProvider::default()).unwrap();
        use PunctClass::*;
        assert_eq!(out.labels, vec![O, Period, O, O, Comma, O, O, Question]);
        assert!(out.overlap.iter().all(|c| *c >= 1));
    }

    #[test]
    fn empty_transcript_decodes_to_nothing() {
        let config = DecodingConfig::new(4, 2, 1, 1, CombinerKind::Mean).unwrap();
        let out = decode(&[], &config, &RuleProvider::default()).unwrap();
        assert!(out.labels.is_empty());
    }
}
