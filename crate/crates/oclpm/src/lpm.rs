//! Local process model discovery: combining accepted places into small
//! connected nets and scoring them by windowed matching.
//!
//! A model matches at an anchor event when some subsequence of the events
//! in the anchor's window, starting with the anchor itself, replays the
//! whole net from the empty marking back to the empty marking, never going
//! negative and firing every transition at least once. Events outside the
//! model's alphabet may be skipped freely. The matcher returns the
//! lexicographically earliest such subsequence (by index sequence, shorter
//! prefixes first).
//!
//! Search proceeds level by level: level one holds each place alone, and
//! every surviving model is extended by one more place from the pool.
//! Models survive while they stay connected, within the size bounds, and
//! matched often enough. Emitted models additionally meet the minimum size
//! bounds, and are ranked by the harmonic mean of normalized support and
//! event coverage.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event_log::{Event, SimpleEventLog};
use crate::petri::{
    net_signature, place_signature, LabeledPetriNet, NetArc, PlaceId, PlaceNet,
};

/// Tunables for model combination and scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryConfig {
    pub min_places: usize,
    pub max_places: usize,
    pub min_transitions: usize,
    pub max_transitions: usize,
    /// Number of events in each matching window, anchor included.
    pub window_size: usize,
    /// Minimum number of matched anchors for a model to survive.
    pub min_occurrences: usize,
    /// Arcs whose activity binds a single object less often than this
    /// fraction of the time are marked variable.
    pub variable_arc_threshold: f64,
    /// Keep at most this many models overall.
    pub max_models: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            min_places: 2,
            max_places: 7,
            min_transitions: 3,
            max_transitions: 10,
            window_size: 7,
            min_occurrences: 5,
            variable_arc_threshold: 0.95,
            max_models: 1000,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_places == 0 || self.min_transitions == 0 {
            return Err(Error::InvalidConfig(
                "minimum place and transition counts must be at least 1".into(),
            ));
        }
        if self.min_places > self.max_places {
            return Err(Error::InvalidConfig(
                "min_places must not exceed max_places".into(),
            ));
        }
        if self.min_transitions > self.max_transitions {
            return Err(Error::InvalidConfig(
                "min_transitions must not exceed max_transitions".into(),
            ));
        }
        if self.window_size == 0 {
            return Err(Error::InvalidConfig("window_size must be at least 1".into()));
        }
        if self.min_occurrences == 0 {
            return Err(Error::InvalidConfig(
                "min_occurrences must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.variable_arc_threshold) {
            return Err(Error::InvalidConfig(
                "variable_arc_threshold must lie in [0, 1]".into(),
            ));
        }
        if self.max_models == 0 {
            return Err(Error::InvalidConfig("max_models must be at least 1".into()));
        }
        Ok(())
    }
}

/// A local process model: a labeled net built from accepted places, each
/// place remembering the single-place net it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lpm {
    pub net: LabeledPetriNet,
    pub provenance: BTreeMap<PlaceId, PlaceNet>,
}

impl Lpm {
    /// Builds the union net of the given places. Transitions with the same
    /// label are merged; places are numbered `p0..` in sorted place order.
    pub fn from_place_nets(places: impl IntoIterator<Item = PlaceNet>) -> Lpm {
        let sorted: BTreeSet<PlaceNet> = places.into_iter().collect();
        let mut net = LabeledPetriNet::default();
        let mut provenance = BTreeMap::new();
        for (k, place_net) in sorted.iter().enumerate() {
            let place = net.add_place(format!("p{k}"));
            for label in &place_net.inputs {
                let t = net.add_transition(label.clone(), label.clone());
                net.add_arc(NetArc::TransitionToPlace(t, place.clone()));
            }
            for label in &place_net.outputs {
                let t = net.add_transition(label.clone(), label.clone());
                net.add_arc(NetArc::PlaceToTransition(place.clone(), t));
            }
            provenance.insert(place, place_net.clone());
        }
        Lpm { net, provenance }
    }

    pub fn place_count(&self) -> usize {
        self.net.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.net.transitions.len()
    }

    pub fn transition_labels(&self) -> BTreeSet<&str> {
        self.net
            .labels
            .values()
            .filter_map(|l| l.as_deref())
            .collect()
    }

    /// Structure-only signature: equal exactly for models that are the same
    /// net up to identifier renaming.
    pub fn canonical_form(&self) -> String {
        let signatures = self
            .provenance
            .values()
            .map(|p| place_signature(&p.inputs, &p.outputs, &p.origin_type, &BTreeSet::new()))
            .collect();
        let isolated = self
            .net
            .isolated_transitions()
            .into_iter()
            .filter_map(|t| self.net.label_of(t))
            .map(String::from)
            .collect();
        net_signature(signatures, &isolated)
    }
}

struct CompiledLpm<'a> {
    label_to_transition: BTreeMap<&'a str, usize>,
    consume: Vec<Vec<usize>>,
    produce: Vec<Vec<usize>>,
    place_count: usize,
}

impl<'a> CompiledLpm<'a> {
    fn compile(lpm: &'a Lpm) -> Self {
        let place_index: BTreeMap<&PlaceId, usize> = lpm
            .net
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        let transition_index: BTreeMap<&str, usize> = lpm
            .net
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.0.as_str(), i))
            .collect();
        let mut label_to_transition = BTreeMap::new();
        for (t, label) in &lpm.net.labels {
            if let Some(label) = label {
                label_to_transition.insert(label.as_str(), transition_index[t.0.as_str()]);
            }
        }
        let mut consume = vec![Vec::new(); transition_index.len()];
        let mut produce = vec![Vec::new(); transition_index.len()];
        for arc in &lpm.net.arcs {
            match arc {
                NetArc::PlaceToTransition(p, t) => {
                    consume[transition_index[t.0.as_str()]].push(place_index[p]);
                }
                NetArc::TransitionToPlace(t, p) => {
                    produce[transition_index[t.0.as_str()]].push(place_index[p]);
                }
            }
        }
        CompiledLpm {
            label_to_transition,
            consume,
            produce,
            place_count: place_index.len(),
        }
    }

    fn transition_count(&self) -> usize {
        self.consume.len()
    }

    fn can_fire(&self, t: usize, marking: &[i64]) -> bool {
        self.consume[t].iter().all(|&p| marking[p] >= 1)
    }

    fn fire(&self, t: usize, marking: &mut [i64]) {
        for &p in &self.consume[t] {
            marking[p] -= 1;
        }
        for &p in &self.produce[t] {
            marking[p] += 1;
        }
    }

    fn unfire(&self, t: usize, marking: &mut [i64]) {
        for &p in &self.produce[t] {
            marking[p] -= 1;
        }
        for &p in &self.consume[t] {
            marking[p] += 1;
        }
    }

    /// Depth-first search for the earliest completing extension. Completion
    /// is checked before extending, so a valid shorter selection beats every
    /// longer one sharing its prefix.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        window: &[Event],
        start: usize,
        marking: &mut Vec<i64>,
        fired: &mut Vec<usize>,
        fired_kinds: &mut usize,
        selection: &mut Vec<usize>,
    ) -> bool {
        if *fired_kinds == self.transition_count() && marking.iter().all(|&m| m == 0) {
            return true;
        }
        for j in start..window.len() {
            let Some(&t) = self.label_to_transition.get(window[j].activity.as_str()) else {
                continue;
            };
            if !self.can_fire(t, marking) {
                continue;
            }
            self.fire(t, marking);
            fired[t] += 1;
            if fired[t] == 1 {
                *fired_kinds += 1;
            }
            selection.push(j);
            if self.dfs(window, j + 1, marking, fired, fired_kinds, selection) {
                return true;
            }
            selection.pop();
            fired[t] -= 1;
            if fired[t] == 0 {
                *fired_kinds -= 1;
            }
            self.unfire(t, marking);
        }
        false
    }

    fn try_match(&self, window: &[Event]) -> Option<Vec<usize>> {
        let first = window.first()?;
        let &anchor = self.label_to_transition.get(first.activity.as_str())?;

        // Every transition must fire, so every label must be present.
        let mut present = vec![false; self.transition_count()];
        for event in window {
            if let Some(&t) = self.label_to_transition.get(event.activity.as_str()) {
                present[t] = true;
            }
        }
        if present.iter().any(|p| !p) {
            return None;
        }

        let mut marking = vec![0i64; self.place_count];
        if !self.can_fire(anchor, &marking) {
            return None;
        }
        self.fire(anchor, &mut marking);
        let mut fired = vec![0usize; self.transition_count()];
        fired[anchor] = 1;
        let mut fired_kinds = 1;
        let mut selection = vec![0];
        self.dfs(window, 1, &mut marking, &mut fired, &mut fired_kinds, &mut selection)
            .then_some(selection)
    }
}

/// Finds the earliest subsequence of `window` that starts with its first
/// event and replays the model completely; returns indices into the window.
pub fn match_window(lpm: &Lpm, window: &[Event]) -> Option<Vec<usize>> {
    CompiledLpm::compile(lpm).try_match(window)
}

/// Aggregated matching outcome over a whole log.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchStats {
    /// Number of anchor events whose window matched.
    pub support: usize,
    /// Ids of all events in some matched subsequence.
    pub covered_events: BTreeSet<String>,
}

/// Slides a window of `window_size` events over every trace, trying every
/// event as an anchor. Matched subsequences may overlap.
pub fn match_log(lpm: &Lpm, slog: &SimpleEventLog, window_size: usize) -> MatchStats {
    let compiled = CompiledLpm::compile(lpm);
    let per_trace: Vec<(usize, BTreeSet<String>)> = slog
        .traces
        .par_iter()
        .map(|trace| {
            let mut support = 0;
            let mut covered = BTreeSet::new();
            for anchor in 0..trace.events.len() {
                let end = (anchor + window_size).min(trace.events.len());
                let window = &trace.events[anchor..end];
                if let Some(selection) = compiled.try_match(window) {
                    support += 1;
                    covered.extend(selection.iter().map(|&j| window[j].id.clone()));
                }
            }
            (support, covered)
        })
        .collect();
    let mut stats = MatchStats::default();
    for (support, covered) in per_trace {
        stats.support += support;
        stats.covered_events.extend(covered);
    }
    stats
}

/// A model that met all bounds, with its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLpm {
    pub lpm: Lpm,
    pub support: usize,
    /// Support over trace count, capped at 1.
    pub normalized_support: f64,
    /// Covered events over all distinct events of the log.
    pub coverage: f64,
    /// Harmonic mean of normalized support and coverage.
    pub rank: f64,
    pub covered_events: BTreeSet<String>,
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Builds, filters, and ranks local process models over the given place
/// pool. See the module docs for the search and the scoring.
pub fn discover_lpms(
    place_nets: &[PlaceNet],
    slog: &SimpleEventLog,
    config: &DiscoveryConfig,
) -> Result<Vec<RankedLpm>> {
    config.validate()?;
    let pool: Vec<PlaceNet> = place_nets
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    struct Survivor {
        places: BTreeSet<PlaceNet>,
        lpm: Lpm,
        stats: MatchStats,
    }

    let evaluate = |candidate: BTreeSet<PlaceNet>| -> Option<Survivor> {
        let lpm = Lpm::from_place_nets(candidate.iter().cloned());
        if lpm.transition_count() > config.max_transitions || !lpm.net.is_connected() {
            return None;
        }
        let stats = match_log(&lpm, slog, config.window_size);
        (stats.support >= config.min_occurrences).then_some(Survivor {
            places: candidate,
            lpm,
            stats,
        })
    };

    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut frontier: Vec<Survivor> = pool
        .par_iter()
        .map(|p| evaluate(BTreeSet::from([p.clone()])))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    for survivor in &frontier {
        seen.insert(survivor.lpm.canonical_form());
    }

    let mut survivors: Vec<Survivor> = Vec::new();
    while !frontier.is_empty() {
        let grown = frontier
            .first()
            .map(|s| s.places.len() >= config.max_places)
            .unwrap_or(true);
        if grown {
            survivors.extend(frontier);
            break;
        }
        let mut candidates: Vec<BTreeSet<PlaceNet>> = Vec::new();
        for survivor in &frontier {
            for place in &pool {
                if survivor.places.contains(place) {
                    continue;
                }
                let mut extended = survivor.places.clone();
                extended.insert(place.clone());
                let key = Lpm::from_place_nets(extended.iter().cloned()).canonical_form();
                if seen.insert(key) {
                    candidates.push(extended);
                }
            }
        }
        let next: Vec<Survivor> = candidates
            .into_par_iter()
            .map(evaluate)
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        survivors.extend(std::mem::replace(&mut frontier, next));
    }

    let trace_count = slog.trace_count();
    let event_count = slog.distinct_event_count();
    let mut ranked: Vec<RankedLpm> = survivors
        .into_iter()
        .filter(|s| {
            s.places.len() >= config.min_places
                && s.lpm.transition_count() >= config.min_transitions
        })
        .map(|s| {
            let normalized_support = if trace_count == 0 {
                0.0
            } else {
                (s.stats.support as f64 / trace_count as f64).min(1.0)
            };
            let coverage = if event_count == 0 {
                0.0
            } else {
                s.stats.covered_events.len() as f64 / event_count as f64
            };
            RankedLpm {
                rank: harmonic(normalized_support, coverage),
                support: s.stats.support,
                normalized_support,
                coverage,
                covered_events: s.stats.covered_events,
                lpm: s.lpm,
            }
        })
        .collect();

    ranked.sort_by(|a, b| {
        b.rank
            .partial_cmp(&a.rank)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| b.lpm.transition_count().cmp(&a.lpm.transition_count()))
            .then_with(|| a.lpm.canonical_form().cmp(&b.lpm.canonical_form()))
    });
    ranked.truncate(config.max_models);
    Ok(ranked)
}
