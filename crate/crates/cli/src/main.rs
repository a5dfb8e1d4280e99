//! `maskcombine`: decode, plan, score and sweep punctuation runs.
//!
//! Settings are layered: preset defaults, then `--config FILE`
//! (flat `key=value`), then flags. Failures print
//! `error[<category>]: <message>` and exit with status 1.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use maskcombine::manifest::{Mode, Settings};
use maskcombine::run::{execute_decode, execute_eval, execute_sweep, SweepPlan};
use maskcombine::{
    compare_runs, generate_windows, stream_instances, sweep_grid, Average, EvalReport,
    ReportFormat, RunManifest, TokenStream,
};

#[derive(Parser)]
#[command(
    name = "maskcombine",
    version,
    about = "Mask-combine decoding for punctuation prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Punctuate a transcript.
    Decode(DecodeArgs),
    /// Print the window plan an exporter must follow.
    EmitWindows(EmitWindowsArgs),
    /// Print `[PUNCT]` classification instances as JSON lines.
    EmitInstances(EmitInstancesArgs),
    /// Score predicted labels against reference labels.
    Eval(EvalArgs),
    /// Score a window/stride grid in real-time mode.
    Sweep(SweepArgs),
}

/// Flags that map onto manifest keys.
#[derive(Args, Default)]
struct RunFlags {
    /// key=value file, overridden by flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// unmasked | masked | double-overlap | overlapped-chunk | realtime | custom
    #[arg(long)]
    strategy: Option<String>,
    /// tagging | classification
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    mask_left: Option<usize>,
    #[arg(long)]
    mask_right: Option<usize>,
    /// Predictions per interior word; derives the stride
    #[arg(long)]
    overlap_n: Option<usize>,
    /// mean | entropy | hamming
    #[arg(long)]
    combiner: Option<String>,
    /// waive | causal
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    lookahead: Option<usize>,
    #[arg(long)]
    overlap_size: Option<usize>,
    #[arg(long)]
    min_words_cut: Option<usize>,
    /// file:PATH | rule:[PATH] | noisy:WEIGHT:<provider>
    #[arg(long)]
    provider: Option<String>,
}

impl RunFlags {
    fn settings(&self) -> Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::parse(&read_file(path)?, &path.display().to_string())?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        let pairs: [(&str, Option<String>); 13] = [
            ("strategy", self.strategy.clone()),
            ("mode", self.mode.clone()),
            ("window", self.window.map(|v| v.to_string())),
            ("stride", self.stride.map(|v| v.to_string())),
            ("mask_left", self.mask_left.map(|v| v.to_string())),
            ("mask_right", self.mask_right.map(|v| v.to_string())),
            ("overlap_n", self.overlap_n.map(|v| v.to_string())),
            ("combiner", self.combiner.clone()),
            ("boundary", self.boundary.clone()),
            ("lookahead", self.lookahead.map(|v| v.to_string())),
            ("overlap_size", self.overlap_size.map(|v| v.to_string())),
            ("min_words_cut", self.min_words_cut.map(|v| v.to_string())),
            ("provider", self.provider.clone()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v);
            }
        }
        // A flag that changes geometry invalidates resolved values carried
        // over from a saved manifest.
        if !flags.is_empty() {
            settings.clear_resolved();
        }
        settings.merge(&flags);
        Ok(settings)
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    run: RunFlags,
    /// Unpunctuated transcript; stdin when omitted or `-`
    #[arg(long)]
    input: Option<PathBuf>,
    /// Punctuated transcript; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    /// One label per word
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Write the resolved run manifest here
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EmitWindowsArgs {
    #[command(flatten)]
    run: RunFlags,
    /// Transcript whose words are counted; stdin when omitted and no --length
    #[arg(long, conflicts_with = "length")]
    input: Option<PathBuf>,
    /// Number of words, instead of reading a transcript
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Args)]
struct EmitInstancesArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// The input carries reference punctuation; instances get targets
    #[arg(long)]
    punctuated: bool,
    #[arg(long, default_value_t = 0)]
    lookahead: usize,
    #[arg(long, default_value_t = maskcombine::manifest::REALTIME_WINDOW)]
    window: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted label file; repeat as NAME=PATH to compare runs
    #[arg(long, required = true, alias = "input")]
    predicted: Vec<String>,
    #[arg(long)]
    reference: PathBuf,
    /// Run name the others are compared against (default: the first)
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    #[arg(long, default_value = "micro")]
    average: Average,
}

#[derive(Args)]
struct SweepArgs {
    /// Punctuated reference transcript
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    windows: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    strides: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    lookaheads: Vec<usize>,
    /// Provider template; `{w}`, `{s}` and `{l}` are substituted per run
    #[arg(long)]
    provider: String,
    #[arg(long, default_value = "tagging")]
    mode: Mode,
    #[arg(long)]
    combiner: Option<String>,
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    #[arg(long, default_value = "micro")]
    average: Average,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decode(args) => cmd_decode(args),
        Command::EmitWindows(args) => cmd_emit_windows(args),
        Command::EmitInstances(args) => cmd_emit_instances(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = err
                .chain()
                .find_map(|e| e.downcast_ref::<maskcombine::Error>())
                .map_or("io", |e| e.category().as_str());
            eprintln!("error[{category}]: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => read_file(p),
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .context("cannot read stdin")?;
            Ok(text)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write stdout"),
    }
}

fn cmd_decode(args: DecodeArgs) -> Result<()> {
    let mut settings = args.run.settings()?;
    for (key, value) in [
        ("input", &args.input),
        ("output", &args.output),
        ("labels_out", &args.labels_out),
    ] {
        if let Some(v) = value {
            settings.set(key, v.display());
        }
    }
    let manifest = RunManifest::from_settings(&settings)?;
    let transcript = read_input(manifest.input.as_deref())?;
    let out = execute_decode(&manifest, &transcript)?;
    if let Some(path) = &args.manifest {
        fs::write(path, manifest.to_text())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    write_output(manifest.output.as_deref(), &out.punctuated)?;
    if let Some(path) = &manifest.labels_out {
        write_output(Some(path), &out.labels_text)?;
    }
    Ok(())
}

fn cmd_emit_windows(args: EmitWindowsArgs) -> Result<()> {
    let mut settings = args.run.settings()?;
    if settings.get_str("provider").is_none() {
        // The plan does not depend on the provider.
        settings.set("provider", "rule:");
    }
    let manifest = RunManifest::from_settings(&settings)?;
    if manifest.mode == Mode::Classification {
        bail!(maskcombine::Error::Config(
            "classification runs have no window plan; use emit-instances".into()
        ));
    }
    let len = match args.length {
        Some(n) => n,
        None => TokenStream::from_text(&read_input(args.input.as_deref())?)?.len(),
    };
    let mut out = String::new();
    for spec in generate_windows(len, &manifest.config) {
        out.push_str(&spec.to_plan_line());
        out.push('\n');
    }
    write_output(None, &out)
}

fn cmd_emit_instances(args: EmitInstancesArgs) -> Result<()> {
    let text = read_input(args.input.as_deref())?;
    let stream = if args.punctuated {
        TokenStream::from_punctuated(&text)?
    } else {
        TokenStream::from_text(&text)?
    };
    let mut out = String::new();
    for inst in stream_instances(&stream, args.lookahead, args.window)? {
        out.push_str(&inst.to_record());
        out.push('\n');
    }
    write_output(None, &out)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let reference_origin = args.reference.display().to_string();
    let reference = read_file(&args.reference)?;
    let mut reports: Vec<(String, EvalReport)> = Vec::new();
    for spec in &args.predicted {
        let (name, path) = match spec.split_once('=') {
            Some((name, path)) if args.predicted.len() > 1 => {
                (name.to_string(), PathBuf::from(path))
            }
            _ => (spec.clone(), PathBuf::from(spec)),
        };
        let origin = path.display().to_string();
        let report = execute_eval(
            &read_file(&path)?,
            &origin,
            &reference,
            &reference_origin,
            args.average,
        )?;
        reports.push((name, report));
    }

    let mut out = String::new();
    if let [(_, report)] = reports.as_slice() {
        out.push_str(&report.render(args.format));
    } else {
        for (name, report) in &reports {
            match args.format {
                ReportFormat::Table => {
                    out.push_str(&format!("== {name}\n{}\n", report.render_table()))
                }
                ReportFormat::Records => {
                    for line in report.render_records().lines() {
                        out.push_str(&format!("{{\"run\":{name:?},{}\n", &line[1..]));
                    }
                }
            }
        }
        let baseline = args
            .baseline
            .clone()
            .unwrap_or_else(|| reports[0].0.clone());
        let comparison = compare_runs(&reports, &baseline)?;
        if args.format == ReportFormat::Table {
            out.push_str(&comparison.render_table());
        }
    }
    write_output(None, &out)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let reference = TokenStream::from_punctuated(&read_file(&args.reference)?)?;
    let mut base = Settings::new();
    if let Some(c) = &args.combiner {
        base.set("combiner", c);
    }
    let plan = SweepPlan {
        runs: sweep_grid(&args.windows, &args.strides, &args.lookaheads)?,
        mode: args.mode,
        provider: args.provider.parse()?,
        base,
        average: args.average,
    };
    let table = execute_sweep(&plan, &reference)?;
    write_output(args.output.as_deref(), &table.render(args.format))
}
