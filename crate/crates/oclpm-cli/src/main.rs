//! `oclpm` binary: discover object-centric local process models from OCEL
//! JSON logs, inspect logs, flatten them per type, and generate synthetic
//! fixtures.
//!
//! Exit codes: 0 on success (a run with zero models is a success), 1 on
//! usage errors, 2 on input and parse errors, 3 on internal assertion
//! failures. The log level is controlled by the `OCLPM_LOG_LEVEL`
//! environment variable (error, warn, info, or debug).

use clap::{Args, Parser, Subcommand};
use oclpm::execution::{flatten, ExecutionStrategy};
use oclpm::fixtures::{generate_order_log, generate_random_log, generate_retail_log};
use oclpm::io::{export_simple_log_csv, parse_ocel_file, write_ocel_json, ParseReport};
use oclpm::lpm::DiscoveryConfig;
use oclpm::oracle::OracleConfig;
use oclpm::Error;
use oclpm_cli::pipeline::{run_discovery, PipelineConfig, RunReport};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "oclpm", version, about = "Object-centric local process model discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover models from an OCEL JSON log and export them
    Discover(DiscoverArgs),
    /// Print summary statistics of an OCEL JSON log
    Stats(StatsArgs),
    /// Write one flattened CSV per object type
    Flatten(FlattenArgs),
    /// Generate a synthetic OCEL JSON log
    GenerateFixture(FixtureArgs),
}

#[derive(Args)]
struct DiscoverArgs {
    /// OCEL JSON input file
    #[arg(long)]
    input: PathBuf,
    /// Execution grouping: connected-components or leading-type[:<type>]
    #[arg(long, default_value = "connected-components")]
    strategy: String,
    /// Leading object type when --strategy leading-type is given
    #[arg(long)]
    leading_type: Option<String>,
    /// Smallest number of places per model
    #[arg(long, default_value_t = 2)]
    min_places: usize,
    /// Largest number of places per model
    #[arg(long, default_value_t = 7)]
    max_places: usize,
    /// Smallest number of transitions per model
    #[arg(long, default_value_t = 3)]
    min_transitions: usize,
    /// Largest number of transitions per model
    #[arg(long, default_value_t = 10)]
    max_transitions: usize,
    /// Events per matching window, anchor included
    #[arg(long, default_value_t = 7)]
    window: usize,
    /// Minimum matched anchors for a model to survive
    #[arg(long, default_value_t = 5)]
    min_occurrences: usize,
    /// Variable-arc threshold on the single-object fraction
    #[arg(long, default_value_t = 0.95)]
    tau_var: f64,
    /// Minimum fraction of fitting traces for a place
    #[arg(long, default_value_t = 0.9)]
    tau_fit: f64,
    /// Largest input/output set size of a place
    #[arg(long, default_value_t = 2)]
    max_io_size: usize,
    /// Keep at most this many models
    #[arg(long, default_value_t = 1000)]
    max_models: usize,
    /// Worker threads for the parallel phases (default: machine parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Models JSON output file; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    /// Directory for per-model DOT files
    #[arg(long)]
    dot_dir: Option<PathBuf>,
    /// Add S/E endpoint ellipses per object type to the DOT output
    #[arg(long)]
    show_endpoints: bool,
}

#[derive(Args)]
struct StatsArgs {
    /// OCEL JSON input file
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct FlattenArgs {
    /// OCEL JSON input file
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving one CSV file per object type
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct FixtureArgs {
    /// Fixture family: order, retail, or random
    #[arg(long, default_value = "order")]
    kind: String,
    /// Number of orders (order and retail fixtures)
    #[arg(long, default_value_t = 20)]
    orders: usize,
    /// Largest number of items per order (order and retail fixtures)
    #[arg(long, default_value_t = 3)]
    max_items: usize,
    /// Customer pool size (retail fixtures)
    #[arg(long, default_value_t = 10)]
    customers: usize,
    /// Number of events (random fixtures)
    #[arg(long, default_value_t = 100)]
    events: usize,
    /// Number of object types (random fixtures)
    #[arg(long, default_value_t = 3)]
    types: usize,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    let code = std::panic::catch_unwind(run).unwrap_or_else(|_| {
        eprintln!("internal error: unexpected panic");
        3
    });
    std::process::exit(code);
}

fn run() -> i32 {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            use clap::error::ErrorKind;
            let code = match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = error.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Discover(args) => run_discover(args),
        Command::Stats(args) => run_stats(args),
        Command::Flatten(args) => run_flatten(args),
        Command::GenerateFixture(args) => run_fixture(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code(&error)
        }
    }
}

fn init_logging() {
    let level = std::env::var("OCLPM_LOG_LEVEL").unwrap_or_else(|_| "warn".to_string());
    env_logger::Builder::new().parse_filters(&level).init();
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::UnknownObjectType { .. }
        | Error::ReservedTypeInUse(_)
        | Error::EmptyLeadingType(_)
        | Error::InvalidFixtureArgs(_)
        | Error::InvalidConfig(_) => 1,
        Error::JsonSyntax { .. }
        | Error::Malformed(_)
        | Error::UndeclaredObject { .. }
        | Error::InvalidTimestamp { .. }
        | Error::NonScalarAttribute { .. }
        | Error::InvalidLog(_)
        | Error::Csv(_)
        | Error::Io(_) => 2,
        Error::ProvenanceMissing(_) | Error::ProjectionMismatch(_) => 3,
    }
}

fn parse_strategy(strategy: &str, leading_type: Option<&str>) -> oclpm::Result<ExecutionStrategy> {
    if strategy == "connected-components" {
        return Ok(ExecutionStrategy::ConnectedComponents);
    }
    if strategy == "leading-type" {
        return match leading_type {
            Some(ty) if !ty.is_empty() => Ok(ExecutionStrategy::LeadingType(ty.to_string())),
            _ => Err(Error::InvalidConfig(
                "--strategy leading-type requires --leading-type <TYPE>".to_string(),
            )),
        };
    }
    if let Some(ty) = strategy.strip_prefix("leading-type:") {
        if !ty.is_empty() {
            return Ok(ExecutionStrategy::LeadingType(ty.to_string()));
        }
    }
    Err(Error::InvalidConfig(format!(
        "unknown strategy {strategy:?}; expected connected-components or leading-type[:<type>]"
    )))
}

fn print_warnings(report: &ParseReport) {
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
}

fn run_discover(args: &DiscoverArgs) -> oclpm::Result<()> {
    let strategy = parse_strategy(&args.strategy, args.leading_type.as_deref())?;
    let defaults = OracleConfig::default();
    let config = PipelineConfig {
        input: args.input.clone(),
        strategy,
        oracle: OracleConfig {
            max_io_set_size: args.max_io_size,
            min_activity_frequency: defaults.min_activity_frequency,
            min_fitting_fraction: args.tau_fit,
            max_places_per_type: defaults.max_places_per_type,
        },
        discovery: DiscoveryConfig {
            min_places: args.min_places,
            max_places: args.max_places,
            min_transitions: args.min_transitions,
            max_transitions: args.max_transitions,
            window_size: args.window,
            min_occurrences: args.min_occurrences,
            variable_arc_threshold: args.tau_var,
            max_models: args.max_models,
        },
        output: args.output.clone(),
        dot_dir: args.dot_dir.clone(),
        show_endpoints: args.show_endpoints,
        threads: args.threads,
    };
    let report = run_discovery(&config)?;
    print_report(&report);
    Ok(())
}

fn print_report(report: &RunReport) {
    eprintln!("models: {}", report.model_count);
    for (name, duration) in report.times.phases() {
        eprintln!("  {name:<10} {:>9.3}s", duration.as_secs_f64());
    }
    eprintln!("  {:<10} {:>9.3}s", "total", report.times.total.as_secs_f64());
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
}

fn run_stats(args: &StatsArgs) -> oclpm::Result<()> {
    let (log, report) = parse_ocel_file(&args.input)?;
    print_warnings(&report);
    println!("events: {}", log.events().len());
    println!("objects: {}", log.objects().len());
    println!("object types: {}", log.object_types().len());
    let mut counts: BTreeMap<&str, usize> = log
        .object_types()
        .iter()
        .map(|ty| (ty.as_str(), 0))
        .collect();
    for ty in log.objects().values() {
        if let Some(count) = counts.get_mut(ty.as_str()) {
            *count += 1;
        }
    }
    for (ty, count) in counts {
        println!("  {ty}: {count}");
    }
    Ok(())
}

fn run_flatten(args: &FlattenArgs) -> oclpm::Result<()> {
    let (log, report) = parse_ocel_file(&args.input)?;
    print_warnings(&report);
    std::fs::create_dir_all(&args.output)?;
    let mut used_names = std::collections::BTreeSet::new();
    for ty in log.object_types() {
        let slog = flatten(&log, ty)?;
        let mut name = sanitize_filename(ty);
        let mut suffix = 1;
        while !used_names.insert(name.clone()) {
            suffix += 1;
            name = format!("{}_{suffix}", sanitize_filename(ty));
        }
        let path = args.output.join(format!("{name}.csv"));
        let file = std::fs::File::create(&path)?;
        export_simple_log_csv(&slog, file)?;
        println!("wrote {} ({} traces)", path.display(), slog.trace_count());
    }
    Ok(())
}

fn sanitize_filename(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() { "_".to_string() } else { cleaned }
}

fn run_fixture(args: &FixtureArgs) -> oclpm::Result<()> {
    let log = match args.kind.as_str() {
        "order" => generate_order_log(args.orders, args.max_items, args.seed)?,
        "retail" => generate_retail_log(args.orders, args.max_items, args.customers, args.seed)?,
        "random" => generate_random_log(args.events, args.types, args.seed)?,
        other => {
            return Err(Error::InvalidFixtureArgs(format!(
                "unknown fixture kind {other:?}; expected order, retail, or random"
            )))
        }
    };
    let text = write_ocel_json(&log);
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
