//! The `binsmith` command: build a semantic lookup table, bin a CSV field,
//! compare semantic and default bins, or serve the HTTP API.

pub mod render;
pub mod server;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use binsmith_core::concepts::{build_lookup, AlignmentConfig, LookupSources, PipelineParams, SemanticLookupTable};
use binsmith_core::engine::{BinRequest, Engine, Mode};
use binsmith_core::{parse_csv, CsvOptions, Error, LegibilityConfig, Purpose, Table};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const LOOKUP_ENV: &str = "BINSMITH_LOOKUP";

static BUNDLED_CONCEPTS: &str = include_str!("../../core/data/concepts.json");

#[derive(Debug, Parser)]
#[command(name = "binsmith", version, about = "Human-centered binning of quantitative fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the topic model and write a semantic lookup table.
    BuildLookup(BuildLookupArgs),
    /// Bin one field of a CSV file.
    Bin(BinArgs),
    /// Show semantic and default bins next to each other.
    Compare(CompareArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct BuildLookupArgs {
    /// Concept seed file; the bundled list when omitted.
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    /// Field-name corpus, one name per line with an optional tab-separated count.
    #[arg(long)]
    pub fields: PathBuf,
    /// Survey questions as JSON lines.
    #[arg(long)]
    pub surveys: PathBuf,
    /// Topic count; defaults to the number of concepts.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub top_fields: usize,
    #[arg(long, default_value_t = 0.06)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PurposeArg {
    Histogram,
    ColorRamp,
}

impl From<PurposeArg> for Purpose {
    fn from(p: PurposeArg) -> Purpose {
        match p {
            PurposeArg::Histogram => Purpose::Histogram,
            PurposeArg::ColorRamp => Purpose::ColorRamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Ascii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Semantic,
    Default,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub field: String,
    /// Lookup table JSON; falls back to the BINSMITH_LOOKUP variable.
    #[arg(long, env = LOOKUP_ENV)]
    pub lookup: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PurposeArg::Histogram)]
    pub purpose: PurposeArg,
    /// Legibility settings as JSON; unspecified keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BinArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Skip the semantic lookup or insist on it.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, env = LOOKUP_ENV)]
    pub lookup: Option<PathBuf>,
}

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// 2 for unreadable or unparseable input and unknown fields, 3 for a
/// non-numeric field, 1 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonNumeric(_) | Error::EmptyColumn(_) => 3,
        Error::FieldNotFound(_)
        | Error::Parse { .. }
        | Error::Encoding(_)
        | Error::DuplicateColumn(_)
        | Error::EmptyInput
        | Error::Json(_)
        | Error::InvalidConfig(_) => 2,
        _ => 1,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn context(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError {
        code: exit_code(&e).max(2),
        message: format!("{}: {e}", path.display()),
    }
}

pub fn load_lookup(path: Option<&Path>) -> Result<Option<SemanticLookupTable>, CliError> {
    path.map(|p| SemanticLookupTable::from_json(&read(p)?).map_err(context(p)))
        .transpose()
}

fn load_table(path: &Path) -> Result<Table, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    parse_csv(&bytes, CsvOptions::default()).map_err(context(path))
}

fn engine_for(args: &DataArgs) -> Result<Engine, CliError> {
    let mut engine = Engine::new(load_lookup(args.lookup.as_deref())?);
    if let Some(p) = &args.config {
        engine.legibility = serde_json::from_str::<LegibilityConfig>(&read(p)?)
            .map_err(|e| context(p)(Error::from(e)))?;
        engine.legibility.validate().map_err(context(p))?;
    }
    Ok(engine)
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("response serializes");
    s.push('\n');
    s
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError {
        code: 1,
        message: format!("write failed: {e}"),
    })
}

fn build(args: &BuildLookupArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let concepts = match &args.concepts {
        Some(p) => read(p)?,
        None => BUNDLED_CONCEPTS.to_string(),
    };
    let fields = read(&args.fields)?;
    let surveys = read(&args.surveys)?;
    let params = PipelineParams {
        topics: args.k,
        iterations: args.iters,
        seed: args.seed,
        top_fields: args.top_fields,
        alignment: AlignmentConfig {
            a_threshold: args.threshold,
        },
        ..PipelineParams::default()
    };
    let built = build_lookup(
        LookupSources {
            concepts: &concepts,
            field_names: &fields,
            surveys: &surveys,
        },
        &params,
    )
    .map_err(|e| CliError {
        code: exit_code(&e).max(2),
        message: e.to_string(),
    })?;
    std::fs::write(&args.out, built.table.to_json()).map_err(|e| io_error(&args.out, e))?;
    for w in &built.warnings {
        emit(err, &format!("warning: {w}\n"))?;
    }
    let mut report = String::from("topic\tconcept\tscore\n");
    for a in &built.alignments {
        report.push_str(&format!("{}\t{}\t{:.4}\n", a.topic, a.concept, a.score));
    }
    emit(out, &report)
}

fn bin(args: &BinArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let engine = engine_for(&args.data)?;
    let table = load_table(&args.data.data)?;
    let column = table.numeric_column(&args.data.field)?;
    let request = BinRequest {
        field: args.data.field.clone(),
        purpose: args.data.purpose.into(),
        overrides: None,
        forced_mode: args.mode.map(|m| match m {
            ModeArg::Semantic => Mode::Semantic,
            ModeArg::Default => Mode::Default,
        }),
    };
    let response = engine.bin(&column, &request)?;
    match args.format {
        Format::Json => emit(out, &json_line(&response)),
        Format::Ascii => emit(out, &render::render_bin(&response)),
    }
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let engine = engine_for(&args.data)?;
    let table = load_table(&args.data.data)?;
    let column = table.numeric_column(&args.data.field)?;
    let comparison = engine.compare(&args.data.field, &column, args.data.purpose.into())?;
    match args.format {
        Format::Json => emit(out, &json_line(&comparison)),
        Format::Ascii => emit(out, &render::render_compare(&comparison)),
    }
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let engine = Engine::new(load_lookup(args.lookup.as_deref())?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError {
        code: 1,
        message: format!("runtime: {e}"),
    })?;
    runtime.block_on(server::serve(&args.addr, engine)).map_err(|e| CliError {
        code: 1,
        message: format!("server: {e}"),
    })
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::BuildLookup(a) => build(a, out, err),
        Command::Bin(a) => bin(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Serve(a) => serve(a),
    }
}
