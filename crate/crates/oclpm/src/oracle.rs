//! Discovery of single-place nets on a flattened log.
//!
//! Candidates are all `(inputs, outputs)` pairs of non-empty activity sets
//! up to a size bound, drawn from activities that occur in enough traces. A
//! candidate is accepted when the fraction of traces it replays cleanly
//! reaches the fitness threshold and at least one trace moves its marking.
//! Accepted places that only restate a smaller accepted place (superset
//! arcs, identical fitting traces) are pruned, and the survivors are capped
//! per type by fitness and signature.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event_log::{EventLog, SimpleEventLog};
use crate::execution::{flatten, EXECUTION_TYPE};
use crate::petri::PlaceNet;

/// Tunables for place-net discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Largest allowed size of a place's input set and of its output set.
    pub max_io_set_size: usize,
    /// Keep activities occurring in at least this fraction of traces.
    pub min_activity_frequency: f64,
    /// Accept a place when at least this fraction of traces fits it.
    pub min_fitting_fraction: f64,
    /// Keep at most this many places per object type.
    pub max_places_per_type: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_io_set_size: 2,
            min_activity_frequency: 0.05,
            min_fitting_fraction: 0.9,
            max_places_per_type: 50,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_io_set_size == 0 {
            return Err(Error::InvalidConfig("max_io_set_size must be at least 1".into()));
        }
        if self.max_places_per_type == 0 {
            return Err(Error::InvalidConfig("max_places_per_type must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_activity_frequency) {
            return Err(Error::InvalidConfig(
                "min_activity_frequency must lie in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.min_fitting_fraction) {
            return Err(Error::InvalidConfig(
                "min_fitting_fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Fraction of traces the place replays cleanly. Empty logs yield 0.
pub fn fitting_fraction(place: &PlaceNet, slog: &SimpleEventLog) -> f64 {
    if slog.traces.is_empty() {
        return 0.0;
    }
    let fitting = slog
        .traces
        .iter()
        .filter(|t| place.replay(&t.activities()).fits)
        .count();
    fitting as f64 / slog.traces.len() as f64
}

fn combinations(pool: &[&str], size: usize) -> Vec<BTreeSet<String>> {
    fn rec(pool: &[&str], size: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<BTreeSet<String>>) {
        if current.len() == size {
            out.push(current.iter().map(|&i| pool[i].to_string()).collect());
            return;
        }
        for i in start..pool.len() {
            current.push(i);
            rec(pool, size, i + 1, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, size, 0, &mut Vec::new(), &mut out);
    out
}

fn activity_sets(pool: &[&str], max_size: usize) -> Vec<BTreeSet<String>> {
    (1..=max_size.min(pool.len()))
        .flat_map(|size| combinations(pool, size))
        .collect()
}

struct AcceptedPlace {
    place: PlaceNet,
    fitting_traces: BTreeSet<usize>,
}

/// Discovers the accepted single-place nets of one flattened log, tagged
/// with `origin_type`.
pub fn discover_place_nets(
    slog: &SimpleEventLog,
    origin_type: &str,
    config: &OracleConfig,
) -> Result<Vec<PlaceNet>> {
    config.validate()?;
    let trace_count = slog.trace_count();
    if trace_count == 0 {
        return Ok(Vec::new());
    }
    let traces: Vec<Vec<&str>> = slog.traces.iter().map(|t| t.activities()).collect();

    // Frequency filter counts traces containing the activity, not
    // occurrences.
    let pool: Vec<&str> = slog
        .activity_alphabet
        .iter()
        .map(String::as_str)
        .filter(|activity| {
            let containing = traces
                .iter()
                .filter(|t| t.contains(activity))
                .count();
            containing as f64 / trace_count as f64 >= config.min_activity_frequency
        })
        .collect();

    let sets = activity_sets(&pool, config.max_io_set_size);
    let candidates: Vec<(usize, usize)> = (0..sets.len())
        .flat_map(|i| (0..sets.len()).map(move |o| (i, o)))
        .collect();

    let mut accepted: Vec<AcceptedPlace> = candidates
        .par_iter()
        .filter_map(|&(i, o)| {
            let place = PlaceNet {
                inputs: sets[i].clone(),
                outputs: sets[o].clone(),
                origin_type: origin_type.to_string(),
            };
            let mut fitting_traces = BTreeSet::new();
            let mut activated = false;
            for (idx, trace) in traces.iter().enumerate() {
                if place.replay(trace).fits {
                    fitting_traces.insert(idx);
                }
                activated = activated || place.activates(trace);
            }
            let fraction = fitting_traces.len() as f64 / trace_count as f64;
            (activated && fraction >= config.min_fitting_fraction)
                .then_some(AcceptedPlace { place, fitting_traces })
        })
        .collect();

    // A place whose arcs extend a smaller accepted place without changing
    // the fitting trace set adds no information; drop it.
    let mut keep = vec![true; accepted.len()];
    for small in 0..accepted.len() {
        for big in 0..accepted.len() {
            if small == big || !keep[big] {
                continue;
            }
            let (a, b) = (&accepted[small], &accepted[big]);
            let strictly_smaller = (a.place.inputs != b.place.inputs
                || a.place.outputs != b.place.outputs)
                && a.place.inputs.is_subset(&b.place.inputs)
                && a.place.outputs.is_subset(&b.place.outputs);
            if strictly_smaller && a.fitting_traces == b.fitting_traces {
                keep[big] = false;
            }
        }
    }
    let mut survivors: Vec<AcceptedPlace> = accepted
        .drain(..)
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();

    survivors.sort_by(|a, b| {
        b.fitting_traces
            .len()
            .cmp(&a.fitting_traces.len())
            .then_with(|| a.place.signature().cmp(&b.place.signature()))
    });
    survivors.truncate(config.max_places_per_type);
    Ok(survivors.into_iter().map(|a| a.place).collect())
}

/// Runs place discovery on every object type of the log (the reserved
/// execution type excluded) and concatenates the results in type order.
pub fn discover_all_places(log: &EventLog, config: &OracleConfig) -> Result<Vec<PlaceNet>> {
    config.validate()?;
    let types: Vec<&String> = log
        .object_types()
        .iter()
        .filter(|t| t.as_str() != EXECUTION_TYPE)
        .collect();
    let per_type: Vec<Vec<PlaceNet>> = types
        .par_iter()
        .map(|object_type| {
            let slog = flatten(log, object_type)?;
            discover_place_nets(&slog, object_type, config)
        })
        .collect::<Result<_>>()?;
    Ok(per_type.into_iter().flatten().collect())
}
