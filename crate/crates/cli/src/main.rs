//! `pcapvis` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 input-format or
//! I/O error, 3 evaluation contract error.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use pcapvis::colormap::{ColorScheme, SchemeError, Shading};
use pcapvis::config::{ConfigError, PipelineConfig};
use pcapvis::curve::{curve_dump, CurveLayout, LayoutKind};
use pcapvis::dataset::{self, build_dataset};
use pcapvis::eval::{self, EvalError, DEFAULT_THRESHOLD};
use pcapvis::pipeline::{encode_capture, inspect_capture};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONTRACT: u8 = 3;

const RUN_CONFIG_FILE: &str = "run-config.json";

#[derive(Parser)]
#[command(name = "pcapvis", version, about = "Render pcap captures as byte-class Hilbert images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one PNG per chunk of a capture.
    Encode {
        pcap: PathBuf,
        /// Output directory (overrides `output_dir` from the config file).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Byte-class histogram of a capture and its black/white pixel share.
    Inspect {
        pcap: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print "d x y" for every index of a layout.
    CurveDump {
        kind: LayoutKind,
        order: u32,
    },
    /// Encode labeled capture directories into an image dataset.
    BuildDataset {
        #[arg(long)]
        normal: PathBuf,
        #[arg(long)]
        malware: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Score a predictions file against a dataset manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Write the JSON report here instead of printing it after the text report.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

/// Pipeline settings. Flags override the config file, which overrides defaults.
#[derive(Args, Default)]
struct PipelineArgs {
    /// TOML or JSON file with PipelineConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    chunk_size: Option<usize>,
    #[arg(long)]
    layout: Option<LayoutKind>,
    /// Fixed curve order, or "auto".
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    shading: Option<Shading>,
    /// Key-value palette file.
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_ratio: Option<f64>,
    /// Keep every chunk of a capture in the same split.
    #[arg(long)]
    split_by_source: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

/// An error tagged with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        Failure {
            code: classify(&error),
            error,
        }
    }
}

fn classify(error: &anyhow::Error) -> u8 {
    for cause in error.chain() {
        if cause.is::<ConfigError>() || cause.is::<SchemeError>() || cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            if matches!(e, EvalError::InvalidThreshold(_)) {
                return EXIT_USAGE;
            }
            return if e.is_contract_violation() { EXIT_CONTRACT } else { EXIT_INPUT };
        }
    }
    EXIT_INPUT
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn load_config_file(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
    };
    Ok(parsed)
}

impl PipelineArgs {
    fn resolve(&self, out: Option<&PathBuf>) -> Result<(PipelineConfig, ColorScheme)> {
        let mut c = match &self.config {
            Some(path) => load_config_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.chunk_size {
            c.chunk_size = v;
        }
        if let Some(v) = self.layout {
            c.layout = v;
        }
        if let Some(v) = &self.order {
            c.order = match v.as_str() {
                "auto" => None,
                n => Some(n.parse().map_err(|_| usage(format!("--order expects a number or auto, got {n:?}")))?),
            };
        }
        if let Some(v) = self.shading {
            c.shading = v;
        }
        if let Some(v) = &self.scheme {
            c.scheme_file = Some(v.clone());
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.train_ratio {
            c.train_ratio = v;
        }
        if self.split_by_source {
            c.split_by_source = true;
        }
        if let Some(v) = self.jobs {
            c.jobs = Some(v);
        }
        if let Some(v) = out {
            c.output_dir = Some(v.clone());
        }
        c.validate()?;
        let base = match &c.scheme_file {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading palette {}", path.display()))?;
                Some(ColorScheme::parse_config(&text).with_context(|| format!("palette {}", path.display()))?)
            }
            None => None,
        };
        let scheme = c.scheme_with(base)?;
        Ok((c, scheme))
    }
}

fn write_run_config(dir: &Path, config: &PipelineConfig, scheme: &ColorScheme) -> Result<()> {
    let mut value = serde_json::to_value(config)?;
    value["scheme_digest"] = scheme.digest().into();
    value["palette"] = scheme.to_config_string().into();
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    fs::write(dir.join(RUN_CONFIG_FILE), text)?;
    Ok(())
}

fn output_dir(config: &PipelineConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("pcapvis-out"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    match cli.command {
        Command::Encode { pcap, out, pipeline } => {
            let (config, scheme) = pipeline.resolve(out.as_ref())?;
            let dir = output_dir(&config);
            let report = encode_capture(&pcap, &dir, &config, &scheme)?;
            write_run_config(&dir, &config, &scheme)?;
            println!(
                "{}: {} packets, {} bytes -> {} image(s) in {}",
                pcap.display(),
                report.packets,
                report.payload_bytes,
                report.images.len(),
                dir.display()
            );
        }
        Command::Inspect { pcap, json } => {
            let report = inspect_capture(&pcap)?;
            if json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                print!("{}", report.render());
            }
        }
        Command::CurveDump { kind, order } => {
            let layout = CurveLayout::square(kind, order).map_err(|e| usage(e.to_string()))?;
            let mut w = BufWriter::new(stdout.lock());
            curve_dump(&layout, &mut w)?;
            w.flush()?;
        }
        Command::BuildDataset {
            normal,
            malware,
            out,
            pipeline,
        } => {
            let (config, scheme) = pipeline.resolve(out.as_ref())?;
            let dir = output_dir(&config);
            let built = build_dataset(&normal, &malware, &dir, &config, &scheme)?;
            write_run_config(&dir, &config, &scheme)?;
            println!("{} images -> {}", built.manifest.len(), dir.join(dataset::MANIFEST_FILE).display());
            print!("{}", built.summary.render_table());
        }
        Command::Eval {
            manifest,
            predictions,
            threshold,
            json_out,
        } => {
            let manifest = dataset::read_manifest(&manifest)
                .with_context(|| format!("reading manifest {}", manifest.display()))?;
            let predictions = eval::read_predictions(&predictions)
                .with_context(|| format!("reading predictions {}", predictions.display()))?;
            let report = eval::evaluate(&manifest, &predictions, threshold)?;
            print!("{}", report.render());
            let json = serde_json::to_string(&report)?;
            match json_out {
                Some(path) => fs::write(&path, json + "\n")?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

/// The error and its causes, skipping causes already quoted by an outer message.
fn render_chain(error: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in error.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {}", render_chain(&error));
            ExitCode::from(code)
        }
    }
}
