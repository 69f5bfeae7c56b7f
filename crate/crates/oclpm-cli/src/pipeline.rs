//! End-to-end discovery pipeline.
//!
//! [`run_discovery`] executes the phases in order: parse and validate the
//! log, discover the place pool per object type, group events into process
//! executions and flatten over them, search for local process models,
//! annotate them into object-centric models, and write the outputs. Each
//! phase is timed individually and the wall times are returned in the
//! [`RunReport`] alongside every warning gathered on the way.
//!
//! Phases after parsing run inside a dedicated thread pool when a thread
//! count is requested; output bytes do not depend on the thread count.

use crate::dot;
use crate::models_json;
use log::info;
use oclpm::assembly::{assemble_oclpms, Oclpm};
use oclpm::execution::{
    assign_executions, augment_with_executions, flatten, ExecutionStrategy, EXECUTION_TYPE,
};
use oclpm::io::parse_ocel_file;
use oclpm::lpm::{discover_lpms, DiscoveryConfig};
use oclpm::oracle::{discover_all_places, OracleConfig};
use oclpm::{Error, Result};
use std::path::PathBuf;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// OCEL JSON input file.
    pub input: PathBuf,
    pub strategy: ExecutionStrategy,
    pub oracle: OracleConfig,
    pub discovery: DiscoveryConfig,
    /// Models JSON target; stdout when unset.
    pub output: Option<PathBuf>,
    /// Directory receiving one DOT file per model; skipped when unset.
    pub dot_dir: Option<PathBuf>,
    pub show_endpoints: bool,
    /// Worker threads for the parallel phases; machine default when unset.
    pub threads: Option<usize>,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            strategy: ExecutionStrategy::ConnectedComponents,
            oracle: OracleConfig::default(),
            discovery: DiscoveryConfig::default(),
            output: None,
            dot_dir: None,
            show_endpoints: false,
            threads: None,
        }
    }
}

/// Wall time spent in each phase. The phases partition the run, so their
/// sum tracks `total` up to bookkeeping noise.
#[derive(Debug, Clone, Default)]
pub struct PhaseTimes {
    pub parse: Duration,
    pub places: Duration,
    pub executions: Duration,
    pub search: Duration,
    pub assembly: Duration,
    pub write: Duration,
    pub total: Duration,
}

impl PhaseTimes {
    pub fn phases(&self) -> [(&'static str, Duration); 6] {
        [
            ("parse", self.parse),
            ("places", self.places),
            ("executions", self.executions),
            ("search", self.search),
            ("assembly", self.assembly),
            ("write", self.write),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub model_count: usize,
    pub times: PhaseTimes,
    pub warnings: Vec<String>,
}

enum Workers {
    Default,
    Pool(rayon::ThreadPool),
}

impl Workers {
    fn new(threads: Option<usize>) -> Result<Workers> {
        match threads {
            None => Ok(Workers::Default),
            Some(count) => rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .map(Workers::Pool)
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}"))),
        }
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        match self {
            Workers::Default => job(),
            Workers::Pool(pool) => pool.install(job),
        }
    }
}

/// Runs the whole pipeline described by `config`.
pub fn run_discovery(config: &PipelineConfig) -> Result<RunReport> {
    config.oracle.validate()?;
    config.discovery.validate()?;
    let workers = Workers::new(config.threads)?;

    let started = Instant::now();
    let mut times = PhaseTimes::default();
    let mut warnings = Vec::new();

    let phase = Instant::now();
    let (log, parse_report) = parse_ocel_file(&config.input)?;
    warnings.extend(parse_report.warnings);
    let violations = log.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidLog(violations));
    }
    times.parse = phase.elapsed();
    info!(
        "parsed {} events over {} objects of {} types",
        log.events().len(),
        log.objects().len(),
        log.object_types().len()
    );

    let mut models: Vec<Oclpm> = Vec::new();
    if log.is_empty() {
        warnings.push("no events".to_string());
    } else {
        let phase = Instant::now();
        let place_pool = workers.run(|| discover_all_places(&log, &config.oracle))?;
        times.places = phase.elapsed();
        info!("accepted {} places across all types", place_pool.len());

        if place_pool.is_empty() {
            warnings.push("no place passed the oracle; writing 0 models".to_string());
        } else {
            let phase = Instant::now();
            let assignment = assign_executions(&log, config.strategy.clone())?;
            if !assignment.unassigned_events.is_empty() {
                warnings.push(format!(
                    "{} event(s) belong to no execution and are invisible to the search",
                    assignment.unassigned_events.len()
                ));
            }
            let augmented = augment_with_executions(&log, &assignment)?;
            let slog = flatten(&augmented, EXECUTION_TYPE)?;
            times.executions = phase.elapsed();
            info!("grouped the log into {} executions", assignment.executions.len());

            let phase = Instant::now();
            let ranked = workers.run(|| discover_lpms(&place_pool, &slog, &config.discovery))?;
            times.search = phase.elapsed();
            info!("search kept {} ranked models", ranked.len());

            let phase = Instant::now();
            let (assembled, assembly_warnings) =
                workers.run(|| assemble_oclpms(&ranked, &log, &config.discovery));
            warnings.extend(assembly_warnings);
            times.assembly = phase.elapsed();
            models = assembled;
        }
    }

    let phase = Instant::now();
    let records: Vec<models_json::ModelRecord> =
        models.iter().map(models_json::model_record).collect();
    let text = models_json::render(&records);
    match &config.output {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(dir) = &config.dot_dir {
        std::fs::create_dir_all(dir)?;
        for (index, model) in models.iter().enumerate() {
            let path = dir.join(format!("model_{index:03}.dot"));
            std::fs::write(path, dot::render_dot(model, config.show_endpoints))?;
        }
    }
    times.write = phase.elapsed();
    times.total = started.elapsed();

    Ok(RunReport { model_count: models.len(), times, warnings })
}
