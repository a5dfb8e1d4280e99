//! Run manifests: the flat `key=value` description that fully determines a
//! decode.
//!
//! Settings come in layers (preset defaults, then a config file, then
//! command-line flags); [`Settings::merge`] lets later layers win. A
//! resolved [`RunManifest`] writes itself back out with its resolved
//! geometry under `resolved.*` keys, and loading such a file checks that the
//! geometry still resolves the same way.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::config::{Boundary, CombinerKind, DecodingConfig};
use crate::error::{Error, Result};
use crate::provider::ProviderSource;
use crate::strategy::{
    preset_overlapped_chunk, preset_realtime, StrategyPreset, BASELINE_MASK_LEFT,
    BASELINE_MASK_RIGHT, BASELINE_WINDOW,
};
use crate::window::compute_stride;

/// Default window of the real-time presets.
pub const REALTIME_WINDOW: usize = 30;

const KNOWN_KEYS: &[&str] = &[
    "strategy",
    "mode",
    "window",
    "stride",
    "mask_left",
    "mask_right",
    "overlap_n",
    "combiner",
    "boundary",
    "lookahead",
    "overlap_size",
    "min_words_cut",
    "provider",
    "input",
    "output",
    "labels_out",
    "deterministic",
    "engine_version",
    "resolved.window",
    "resolved.stride",
    "resolved.mask_left",
    "resolved.mask_right",
    "resolved.n",
    "resolved.boundary",
];

/// Flat `key=value` settings. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut settings = Settings::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, idx + 1, "expected key=value"))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::parse(
                    origin,
                    idx + 1,
                    format!("unknown key {key:?}"),
                ));
            }
            settings
                .values
                .insert(key.to_string(), value.trim().to_string());
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) -> &mut Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Drops `resolved.*` keys, e.g. before overriding a saved manifest.
    pub fn clear_resolved(&mut self) -> &mut Self {
        self.values.retain(|k, _| !k.starts_with("resolved."));
        self
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::config(format!("{key}={v}: {e}")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str, strategy: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::config(format!("strategy {strategy} requires `{key}`")))
    }

    fn forbid(&self, keys: &[&str], strategy: &str) -> Result<()> {
        match keys.iter().find(|k| self.values.contains_key(**k)) {
            Some(k) => Err(Error::config(format!(
                "strategy {strategy} does not take `{k}`"
            ))),
            None => Ok(()),
        }
    }
}

/// Which decoder a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Window-level tagging with mask-combine decoding.
    #[default]
    Tagging,
    /// One `[PUNCT]` instance per word, real-time parameters only.
    Classification,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Tagging => "tagging",
            Mode::Classification => "classification",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tagging" => Ok(Mode::Tagging),
            "classification" => Ok(Mode::Classification),
            other => Err(Error::config(format!(
                "unknown mode {other:?} (expected tagging or classification)"
            ))),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub strategy: StrategyPreset,
    pub config: DecodingConfig,
    pub n: usize,
    pub mode: Mode,
    /// Lookahead of real-time runs; 0 otherwise.
    pub lookahead: usize,
    pub provider: ProviderSource,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub labels_out: Option<PathBuf>,
    pub engine_version: String,
}

fn parse_strategy_name(name: &str) -> Result<&'static str> {
    let lower = name.trim().to_ascii_lowercase();
    StrategyPreset::NAMES
        .iter()
        .find(|n| **n == lower)
        .copied()
        .ok_or_else(|| {
            Error::config(format!(
                "unknown strategy {name:?} (expected one of {})",
                StrategyPreset::NAMES.join(", ")
            ))
        })
}

impl RunManifest {
    /// Resolves layered settings into a manifest.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let name = parse_strategy_name(settings.get_str("strategy").unwrap_or("unmasked"))?;
        let combiner: CombinerKind = settings.get("combiner")?.unwrap_or_default();
        let explicit_stride: Option<usize> = settings.get("stride")?;
        let n_setting: Option<usize> = settings.get("overlap_n")?;
        let mut lookahead = 0;

        // Masked geometry with the stride either explicit or derived from n.
        let masked = |w: usize, ml: usize, mr: usize, n: usize| -> Result<DecodingConfig> {
            let stride = match explicit_stride {
                Some(s) => s,
                None => compute_stride(w, ml, mr, n)?,
            };
            DecodingConfig::new(w, stride, ml, mr, combiner)
        };

        let (strategy, config, n) = match name {
            "unmasked" => {
                settings.forbid(
                    &[
                        "mask_left",
                        "mask_right",
                        "overlap_size",
                        "min_words_cut",
                        "lookahead",
                    ],
                    name,
                )?;
                let w = settings.get("window")?.unwrap_or(BASELINE_WINDOW);
                let n = n_setting.unwrap_or(1);
                let config = masked(w, 0, 0, n)?;
                let strategy = if w == BASELINE_WINDOW && n == 1 && explicit_stride.is_none() {
                    StrategyPreset::Unmasked
                } else {
                    StrategyPreset::Custom { config, n }
                };
                (strategy, config, n)
            }
            "masked" | "double-overlap" => {
                settings.forbid(&["overlap_size", "min_words_cut", "lookahead"], name)?;
                let w = settings.get("window")?.unwrap_or(BASELINE_WINDOW);
                let ml = settings.get("mask_left")?.unwrap_or(BASELINE_MASK_LEFT);
                let mr = settings.get("mask_right")?.unwrap_or(BASELINE_MASK_RIGHT);
                let n = n_setting.unwrap_or(1);
                let config = masked(w, ml, mr, n)?;
                let plain = n == 1 && explicit_stride.is_none();
                let strategy = match (name, plain) {
                    ("masked", true)
                        if (w, ml, mr)
                            == (BASELINE_WINDOW, BASELINE_MASK_LEFT, BASELINE_MASK_RIGHT) =>
                    {
                        StrategyPreset::Masked
                    }
                    (_, true) => StrategyPreset::DoubleOverlap {
                        window: w,
                        mask_left: ml,
                        mask_right: mr,
                    },
                    _ => StrategyPreset::Custom { config, n },
                };
                (strategy, config, n)
            }
            "overlapped-chunk" => {
                settings.forbid(&["mask_left", "mask_right", "lookahead"], name)?;
                let w = settings.get("window")?.unwrap_or(BASELINE_WINDOW);
                let stride = settings.require("stride", name)?;
                let overlap_size = settings.require("overlap_size", name)?;
                let min_words_cut = settings.require("min_words_cut", name)?;
                let config = preset_overlapped_chunk(stride, overlap_size, min_words_cut, w)?
                    .with_combiner(combiner);
                (
                    StrategyPreset::OverlappedChunk {
                        window: w,
                        stride,
                        overlap_size,
                        min_words_cut,
                    },
                    config,
                    n_setting.unwrap_or(1),
                )
            }
            "realtime" => {
                settings.forbid(
                    &["mask_left", "mask_right", "overlap_size", "min_words_cut"],
                    name,
                )?;
                let w = settings.get("window")?.unwrap_or(REALTIME_WINDOW);
                lookahead = settings.get("lookahead")?.unwrap_or(0);
                if explicit_stride.is_some_and(|s| s != 1) {
                    return Err(Error::config("strategy realtime always uses stride 1"));
                }
                if n_setting.is_some_and(|n| n != 1) {
                    return Err(Error::config(
                        "strategy realtime yields one prediction per word",
                    ));
                }
                let config = preset_realtime(w, lookahead)?.with_combiner(combiner);
                (
                    StrategyPreset::RealTime {
                        window: w,
                        lookahead,
                    },
                    config,
                    1,
                )
            }
            "custom" => {
                settings.forbid(&["overlap_size", "min_words_cut", "lookahead"], name)?;
                let w = settings.get("window")?.unwrap_or(BASELINE_WINDOW);
                let ml = settings.get("mask_left")?.unwrap_or(0);
                let mr = settings.get("mask_right")?.unwrap_or(0);
                let n = n_setting.unwrap_or(1);
                let config = masked(w, ml, mr, n)?;
                (StrategyPreset::Custom { config, n }, config, n)
            }
            _ => unreachable!("strategy names are closed"),
        };

        let config = match settings.get::<Boundary>("boundary")? {
            Some(b) => config.with_boundary(b),
            None => config,
        };
        let strategy = match strategy {
            StrategyPreset::Custom { n, .. } => StrategyPreset::Custom { config, n },
            other => other,
        };

        let mode: Mode = settings.get("mode")?.unwrap_or_default();
        if mode == Mode::Classification && name != "realtime" {
            return Err(Error::config(
                "classification mode runs with the realtime strategy (window + lookahead)",
            ));
        }
        if let Some(det) = settings.get_str("deterministic") {
            if det != "true" {
                return Err(Error::config(
                    "all runs are deterministic; `deterministic` must be true",
                ));
            }
        }

        let provider = settings
            .get_str("provider")
            .ok_or_else(|| Error::config("no provider given (file:PATH or rule:PATH)"))?
            .parse()?;

        let manifest = RunManifest {
            strategy,
            config,
            n,
            mode,
            lookahead,
            provider,
            input: settings.get_str("input").map(PathBuf::from),
            output: settings.get_str("output").map(PathBuf::from),
            labels_out: settings.get_str("labels_out").map(PathBuf::from),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        manifest.check_resolved(settings)?;
        Ok(manifest)
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        Self::from_settings(&Settings::parse(text, origin)?)
    }

    fn check_resolved(&self, settings: &Settings) -> Result<()> {
        let expected = [
            ("resolved.window", self.config.window().to_string()),
            ("resolved.stride", self.config.stride().to_string()),
            ("resolved.mask_left", self.config.mask_left().to_string()),
            ("resolved.mask_right", self.config.mask_right().to_string()),
            ("resolved.n", self.n.to_string()),
            (
                "resolved.boundary",
                self.config.boundary().as_str().to_string(),
            ),
        ];
        for (key, want) in expected {
            if let Some(got) = settings.get_str(key) {
                if got != want {
                    return Err(Error::config(format!(
                        "{key}={got} but the settings resolve to {want}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The settings that reproduce this manifest, including resolved
    /// geometry for verification.
    pub fn to_settings(&self) -> Settings {
        let mut s = Settings::new();
        let c = &self.config;
        match self.strategy {
            StrategyPreset::Unmasked | StrategyPreset::Masked => {
                s.set("strategy", self.strategy.name());
            }
            StrategyPreset::DoubleOverlap {
                window,
                mask_left,
                mask_right,
            } => {
                s.set("strategy", "double-overlap")
                    .set("window", window)
                    .set("mask_left", mask_left)
                    .set("mask_right", mask_right);
            }
            StrategyPreset::OverlappedChunk {
                window,
                stride,
                overlap_size,
                min_words_cut,
            } => {
                s.set("strategy", "overlapped-chunk")
                    .set("window", window)
                    .set("stride", stride)
                    .set("overlap_size", overlap_size)
                    .set("min_words_cut", min_words_cut);
            }
            StrategyPreset::RealTime { window, lookahead } => {
                s.set("strategy", "realtime")
                    .set("window", window)
                    .set("lookahead", lookahead);
            }
            StrategyPreset::Custom { config, n } => {
                s.set("strategy", "custom")
                    .set("window", config.window())
                    .set("stride", config.stride())
                    .set("mask_left", config.mask_left())
                    .set("mask_right", config.mask_right())
                    .set("overlap_n", n);
            }
        }
        if self.mode == Mode::Classification {
            s.set("mode", self.mode.as_str());
        }
        s.set("combiner", c.combiner())
            .set("boundary", c.boundary().as_str())
            .set("provider", &self.provider);
        for (key, path) in [
            ("input", &self.input),
            ("output", &self.output),
            ("labels_out", &self.labels_out),
        ] {
            if let Some(p) = path {
                s.set(key, p.display());
            }
        }
        s.set("deterministic", "true")
            .set("engine_version", &self.engine_version)
            .set("resolved.window", c.window())
            .set("resolved.stride", c.stride())
            .set("resolved.mask_left", c.mask_left())
            .set("resolved.mask_right", c.mask_right())
            .set("resolved.n", self.n)
            .set("resolved.boundary", c.boundary().as_str());
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# maskcombine run manifest\n");
        for (k, v) in &self.to_settings().values {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::new();
        for (k, v) in pairs {
            s.set(k, v);
        }
        s
    }

    #[test]
    fn presets_resolve_with_defaults() {
        let m =
            RunManifest::from_settings(&settings(&[("strategy", "masked"), ("provider", "rule:")]))
                .unwrap();
        assert_eq!(m.strategy, StrategyPreset::Masked);
        assert_eq!(
            (
                m.config.stride(),
                m.config.mask_left(),
                m.config.mask_right()
            ),
            (75, 30, 15)
        );

        let m = RunManifest::from_settings(&settings(&[
            ("strategy", "masked"),
            ("overlap_n", "4"),
            ("provider", "rule:"),
        ]))
        .unwrap();
        assert_eq!((m.config.stride(), m.n), (18, 4));

        let m = RunManifest::from_settings(&settings(&[("provider", "rule:")])).unwrap();
        assert_eq!(m.strategy, StrategyPreset::Unmasked);
        assert_eq!(m.config.stride(), 120);
    }

    #[test]
    fn explicit_stride_overrides_derived_stride() {
        let m = RunManifest::from_settings(&settings(&[
            ("strategy", "masked"),
            ("stride", "70"),
            ("provider", "rule:"),
        ]))
        .unwrap();
        assert_eq!(m.config.stride(), 70);
    }

    #[test]
    fn layering_lets_flags_win() {
        let file = Settings::parse("strategy=custom\nwindow=40\nmask_left=5\n", "cfg").unwrap();
        let flags = settings(&[("window", "20"), ("provider", "rule:")]);
        let mut merged = Settings::new();
        merged.merge(&file).merge(&flags);
        let m = RunManifest::from_settings(&merged).unwrap();
        assert_eq!(
            (m.config.window(), m.config.mask_left(), m.config.stride()),
            (20, 5, 15)
        );
    }

    #[test]
    fn manifest_round_trips() {
        for pairs in [
            vec![
                ("strategy", "masked"),
                ("overlap_n", "2"),
                ("combiner", "hamming"),
            ],
            vec![
                ("strategy", "realtime"),
                ("window", "30"),
                ("lookahead", "3"),
            ],
            vec![
                ("strategy", "realtime"),
                ("lookahead", "1"),
                ("mode", "classification"),
            ],
            vec![
                ("strategy", "overlapped-chunk"),
                ("stride", "20"),
                ("overlap_size", "10"),
                ("min_words_cut", "4"),
            ],
            vec![
                ("strategy", "double-overlap"),
                ("window", "20"),
                ("mask_left", "3"),
                ("mask_right", "6"),
            ],
            vec![
                ("strategy", "custom"),
                ("window", "20"),
                ("mask_left", "3"),
                ("mask_right", "6"),
                ("overlap_n", "2"),
            ],
        ] {
            let mut s = settings(&pairs);
            s.set("provider", "noisy:0.6:rule:");
            let m = RunManifest::from_settings(&s).unwrap();
            let text = m.to_text();
            let again = RunManifest::parse(&text, "manifest").unwrap();
            assert_eq!(again, m, "{text}");
            assert_eq!(again.to_text(), text);
        }
    }

    #[test]
    fn tampered_resolution_is_rejected() {
        let m =
            RunManifest::from_settings(&settings(&[("strategy", "masked"), ("provider", "rule:")]))
                .unwrap();
        let text = m
            .to_text()
            .replace("resolved.stride=75", "resolved.stride=70");
        assert!(RunManifest::parse(&text, "m").is_err());
    }

    #[test]
    fn invalid_settings() {
        let bad = [
            vec![("strategy", "unmasked"), ("mask_left", "3")],
            vec![("strategy", "fast")],
            vec![
                ("strategy", "custom"),
                ("window", "10"),
                ("mask_left", "5"),
                ("mask_right", "5"),
            ],
            vec![("strategy", "overlapped-chunk"), ("stride", "5")],
            vec![("strategy", "masked"), ("mode", "classification")],
            vec![("strategy", "realtime"), ("stride", "2")],
        ];
        for pairs in bad {
            let mut s = settings(&pairs);
            s.set("provider", "rule:");
            assert!(RunManifest::from_settings(&s).is_err(), "{pairs:?}");
        }
        assert!(RunManifest::from_settings(&settings(&[("strategy", "masked")])).is_err());
        assert!(Settings::parse("colour=blue", "cfg").is_err());
    }
}
