//! Mask-combine decoding for punctuation prediction.
//!
//! A tagging model sees the transcript through overlapping windows. Each
//! window's leftmost `m_l` and rightmost `m_r` predictions are discarded,
//! and the stride `s` can be shorter than the unmasked width so that every
//! word collects several distributions. These are fused (mean, entropy
//! weighting or Hamming weighting) and decoded by argmax.
//!
//! The crate is model-agnostic: distributions come from a
//! [`ProbabilityProvider`], typically a [`FileProvider`] replaying exported
//! model output. It also builds `[PUNCT]`-sentinel inputs for the
//! sequence-classification approach ([`classify`]) and scores the results
//! ([`eval`]).
//!
//! ```
//! use maskcombine::{build_custom, decode, CombinerKind, RuleProvider, TokenStream};
//!
//! let stream = TokenStream::from_text("so it begins·P now what·Q").unwrap();
//! let (config, _n) = build_custom(4, 1, 1, 2, CombinerKind::Mean).unwrap();
//! let out = decode(stream.tokens(), &config, &RuleProvider::default()).unwrap();
//! let text = maskcombine::render_punctuated(stream.tokens(), &out.labels).unwrap();
//! assert_eq!(text, "so it begins·P. now what·Q?");
//! ```

pub mod classify;
pub mod combine;
pub mod config;
pub mod decode;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod provider;
pub mod run;
pub mod strategy;
pub mod types;
pub mod window;

pub use classify::{
    build_instance, decode_classification, stream_instances, ClassificationInstance,
    InstanceProvider, RuleInstanceProvider, PUNCT_TOKEN,
};
pub use combine::{
    combine, combine_entropy_weighted, combine_hamming, combine_mean, decode_label, hamming_weight,
};
pub use config::{Boundary, CombinerKind, DecodingConfig};
pub use decode::{decode, Decoded};
pub use error::{Error, ErrorCategory, Result};
pub use eval::{compare_runs, evaluate, evaluate_with, Average, EvalReport, ReportFormat};
pub use manifest::RunManifest;
pub use provider::{
    transcript_hash, FileProvider, LogitsFile, NoisyBoundaryProvider, ProbabilityProvider,
    ProviderSource, RuleProvider,
};
pub use strategy::{
    build_custom, preset_double_overlap, preset_overlapped_chunk, preset_realtime, sweep_grid,
    StrategyPreset, SweepRun,
};
pub use types::{render_punctuated, Distribution, PunctClass, TokenStream};
pub use window::{
    assemble_per_word, compute_stride, generate_windows, interior_range, Contribution,
    WindowPrediction, WindowSpec,
};
