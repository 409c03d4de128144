//! `anchordoc` command-line tool: parse page images, evaluate predictions
//! against ground truth, generate synthetic corpora, or serve parsing over
//! HTTP.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 2    | some pages failed |
//! | 64   | usage or configuration error |
//! | 65   | input data unusable (e.g. no overlapping ids) |
//! | 74   | I/O error |

pub mod config;
pub mod evaluate;
pub mod generate;
pub mod parse;
pub mod serve;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use anchordoc::pipeline::DispatchMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

/// Error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("{context}: {err}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "anchordoc", version, about = "Layout-anchored two-stage document parsing")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse page images into JSON and Markdown.
    Parse(ParseArgs),
    /// Score predicted pages against ground truth.
    Evaluate(EvaluateArgs),
    /// Write a synthetic corpus: specs, SVGs, PNGs and mock fixtures.
    Generate(GenerateArgs),
    /// Serve `POST /parse` over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Md,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispatchArg {
    Hybrid,
    ForceDigital,
    ForceHolistic,
}

impl From<DispatchArg> for DispatchMode {
    fn from(d: DispatchArg) -> Self {
        match d {
            DispatchArg::Hybrid => DispatchMode::Hybrid,
            DispatchArg::ForceDigital => DispatchMode::ForceDigital,
            DispatchArg::ForceHolistic => DispatchMode::ForceHolistic,
        }
    }
}

/// Options shared by `parse` and `serve`.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// `mock:<fixture.json>` or `http:<url>`.
    #[arg(long)]
    pub backend: Option<String>,
    /// Model name sent to an HTTP backend.
    #[arg(long)]
    pub model: Option<String>,
    /// Maximum in-flight element requests per page.
    #[arg(long)]
    pub concurrency: Option<usize>,
    /// Pixels added around each crop.
    #[arg(long)]
    pub crop_padding: Option<u32>,
    /// Keep headers, footers, page numbers and watermarks in Markdown.
    #[arg(long)]
    pub include_marginalia: bool,
    /// TOML file overriding entries of the prompt table.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Stage-2 dispatch; the forced modes are for ablation runs.
    #[arg(long, value_enum)]
    pub dispatch: Option<DispatchArg>,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// An image file or a directory of .png/.jpg images.
    pub input: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of predicted page JSON files.
    pub pred: PathBuf,
    /// Directory of ground-truth page JSON files (specs or parse output).
    pub gt: PathBuf,
    /// Where to write the JSON report.
    #[arg(long, default_value = "eval_report.json")]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Catalog,
    Code,
    PageWarped,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GenerateKind,
    /// Number of pages (at least 1).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub count: u32,
    /// Seed of the first page; page i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "corpus")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Listen address; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

fn init_logging(verbose: u8) {
    use tracing_subscriber::EnvFilter;
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    let env = config::EnvConfig::from_process();
    let result = match cli.command {
        Command::Parse(args) => parse::cmd_parse(&args, &env),
        Command::Evaluate(args) => evaluate::cmd_evaluate(&args),
        Command::Generate(args) => generate::cmd_generate(&args),
        Command::Serve(args) => serve::cmd_serve(&args, &env),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("anchordoc: {e}");
            e.code
        }
    }
}
