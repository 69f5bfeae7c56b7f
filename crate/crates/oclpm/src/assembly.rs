//! Final assembly: turning ranked local process models into object-centric
//! models with typed places and variable arcs.
//!
//! Each place keeps the object type of the flattened log it was discovered
//! on. An arc is variable when its activity too often touches more than one
//! object (or none) of the place's type at once, measured over the model's
//! covered events.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event_log::EventLog;
use crate::lpm::{DiscoveryConfig, Lpm, RankedLpm};
use crate::petri::{
    net_signature, place_signature, project_place, LabeledPetriNet, NetArc, PlaceId, PlaceNet,
};

/// Scores carried over from ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    pub support: usize,
    pub coverage: f64,
    pub rank: f64,
}

/// An object-centric local process model.
#[derive(Debug, Clone, PartialEq)]
pub struct Oclpm {
    pub net: LabeledPetriNet,
    pub place_types: BTreeMap<PlaceId, String>,
    pub variable_arcs: BTreeSet<NetArc>,
    pub provenance: BTreeMap<PlaceId, PlaceNet>,
    pub score: ModelScore,
}

impl Oclpm {
    /// Structure signature including place types and variable arc flags.
    pub fn canonical_form(&self) -> String {
        let signatures = self
            .net
            .places
            .iter()
            .map(|place| {
                let (inputs, outputs) = project_place(&self.net, place);
                let mut flags = BTreeSet::new();
                for arc in &self.variable_arcs {
                    match arc {
                        NetArc::TransitionToPlace(t, p) if p == place => {
                            if let Some(label) = self.net.label_of(t) {
                                flags.insert(format!("in:{label}"));
                            }
                        }
                        NetArc::PlaceToTransition(p, t) if p == place => {
                            if let Some(label) = self.net.label_of(t) {
                                flags.insert(format!("out:{label}"));
                            }
                        }
                        _ => {}
                    }
                }
                let place_type = self
                    .place_types
                    .get(place)
                    .map(String::as_str)
                    .unwrap_or("");
                place_signature(&inputs, &outputs, place_type, &flags)
            })
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

/// One cell of the variable-arc score: how many covered events of an
/// activity bind exactly one object of a type, out of all covered events of
/// that activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VarArcScore {
    pub single: usize,
    pub total: usize,
}

impl VarArcScore {
    /// The score as a fraction; undefined when no event was counted.
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.single as f64 / self.total as f64)
    }
}

/// Variable-arc scores over one model's covered events.
#[derive(Debug, Clone, Default)]
pub struct VarArcScoreTable {
    totals: BTreeMap<String, usize>,
    singles: BTreeMap<(String, String), usize>,
}

impl VarArcScoreTable {
    pub fn from_covered_events(covered: &BTreeSet<String>, log: &EventLog) -> Self {
        let mut table = VarArcScoreTable::default();
        for event_id in covered {
            let Some(event) = log.event_by_id(event_id) else {
                continue;
            };
            *table.totals.entry(event.activity.clone()).or_insert(0) += 1;
            for (object_type, ids) in &event.omap {
                if ids.len() == 1 {
                    *table
                        .singles
                        .entry((event.activity.clone(), object_type.clone()))
                        .or_insert(0) += 1;
                }
            }
        }
        table
    }

    pub fn score(&self, activity: &str, object_type: &str) -> VarArcScore {
        VarArcScore {
            single: self
                .singles
                .get(&(activity.to_string(), object_type.to_string()))
                .copied()
                .unwrap_or(0),
            total: self.totals.get(activity).copied().unwrap_or(0),
        }
    }
}

/// Reads each place's object type off its recorded origin, re-deriving the
/// place's arcs from the net to catch a diverged structure.
pub fn annotate_types(lpm: &Lpm) -> Result<BTreeMap<PlaceId, String>> {
    let mut place_types = BTreeMap::new();
    for place in &lpm.net.places {
        let origin = lpm
            .provenance
            .get(place)
            .ok_or_else(|| Error::ProvenanceMissing(place.0.clone()))?;
        let (inputs, outputs) = project_place(&lpm.net, place);
        if inputs != origin.inputs || outputs != origin.outputs {
            return Err(Error::ProjectionMismatch(format!(
                "place {place} projects to ({inputs:?}, {outputs:?}) but was discovered as ({:?}, {:?})",
                origin.inputs, origin.outputs
            )));
        }
        place_types.insert(place.clone(), origin.origin_type.clone());
    }
    Ok(place_types)
}

/// Marks the arcs whose score falls below the threshold. Arcs without a
/// defined score stay non-variable and produce one warning per
/// activity/type pair.
pub fn identify_variable_arcs(
    lpm: &Lpm,
    place_types: &BTreeMap<PlaceId, String>,
    table: &VarArcScoreTable,
    threshold: f64,
) -> (BTreeSet<NetArc>, Vec<String>) {
    let mut variable = BTreeSet::new();
    let mut undefined: BTreeSet<(String, String)> = BTreeSet::new();
    for arc in &lpm.net.arcs {
        let (place, transition) = match arc {
            NetArc::PlaceToTransition(p, t) | NetArc::TransitionToPlace(t, p) => (p, t),
        };
        let Some(label) = lpm.net.label_of(transition) else {
            continue;
        };
        let Some(object_type) = place_types.get(place) else {
            continue;
        };
        match table.score(label, object_type).value() {
            None => {
                undefined.insert((label.to_string(), object_type.clone()));
            }
            Some(value) if value < threshold => {
                variable.insert(arc.clone());
            }
            Some(_) => {}
        }
    }
    let warnings = undefined
        .into_iter()
        .map(|(label, object_type)| {
            format!(
                "variable-arc score for activity {label:?} and type {object_type:?} is undefined; arc kept non-variable"
            )
        })
        .collect();
    (variable, warnings)
}

/// Turns ranked models into object-centric models. Models that fail type
/// annotation are skipped with a warning instead of aborting the batch.
pub fn assemble_oclpms(
    ranked: &[RankedLpm],
    log: &EventLog,
    config: &DiscoveryConfig,
) -> (Vec<Oclpm>, Vec<String>) {
    let assembled: Vec<(Option<Oclpm>, Vec<String>)> = ranked
        .par_iter()
        .enumerate()
        .map(|(index, model)| match annotate_types(&model.lpm) {
            Err(error) => (
                None,
                vec![format!("skipped model {index}: {error}")],
            ),
            Ok(place_types) => {
                let table = VarArcScoreTable::from_covered_events(&model.covered_events, log);
                let (variable_arcs, warnings) = identify_variable_arcs(
                    &model.lpm,
                    &place_types,
                    &table,
                    config.variable_arc_threshold,
                );
                let oclpm = Oclpm {
                    net: model.lpm.net.clone(),
                    place_types,
                    variable_arcs,
                    provenance: model.lpm.provenance.clone(),
                    score: ModelScore {
                        support: model.support,
                        coverage: model.coverage,
                        rank: model.rank,
                    },
                };
                (
                    Some(oclpm),
                    warnings
                        .into_iter()
                        .map(|w| format!("model {index}: {w}"))
                        .collect(),
                )
            }
        })
        .collect();

    let mut models = Vec::new();
    let mut warnings = Vec::new();
    for (model, mut model_warnings) in assembled {
        models.extend(model);
        warnings.append(&mut model_warnings);
    }
    (models, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::Event;
    use crate::execution::{prepare_simple_log, ExecutionStrategy};
    use crate::fixtures::generate_order_log;
    use crate::lpm::discover_lpms;
    use crate::oracle::{discover_all_places, OracleConfig};
    use chrono::{Duration, TimeZone, Utc};

    fn log_with_item_counts(counts: &[usize]) -> EventLog {
        let base = Utc.with_ymd_and_hms(2024, 3, 1, 8, 0, 0).unwrap();
        let mut events = Vec::new();
        let mut objects = BTreeMap::new();
        for (n, &count) in counts.iter().enumerate() {
            let items: BTreeSet<String> = (0..count).map(|j| format!("i{n}_{j}")).collect();
            for item in &items {
                objects.insert(item.clone(), "item".to_string());
            }
            events.push(Event::new(
                format!("e{n}"),
                "Place order",
                base + Duration::seconds(n as i64),
                BTreeMap::from([("item".to_string(), items)]),
            ));
        }
        EventLog::new(events, objects)
    }

    #[test]
    fn score_counts_single_object_bindings() {
        let log = log_with_item_counts(&[2, 3, 1]);
        let covered: BTreeSet<String> =
            log.events().iter().map(|e| e.id.clone()).collect();
        let table = VarArcScoreTable::from_covered_events(&covered, &log);
        let score = table.score("Place order", "item");
        assert_eq!((score.single, score.total), (1, 3));
        assert_eq!(score.value(), Some(1.0 / 3.0));
        assert_eq!(table.score("Ghost", "item").value(), None);
    }

    #[test]
    fn scores_only_see_covered_events() {
        let log = log_with_item_counts(&[2, 1, 1]);
        let covered = BTreeSet::from(["e1".to_string(), "e2".to_string()]);
        let table = VarArcScoreTable::from_covered_events(&covered, &log);
        assert_eq!(table.score("Place order", "item"), VarArcScore { single: 2, total: 2 });
    }

    #[test]
    fn annotation_carries_origin_types() {
        let lpm = Lpm::from_place_nets([
            PlaceNet::new(["a"], ["b"], "order"),
            PlaceNet::new(["b"], ["c"], "item"),
        ]);
        let place_types = annotate_types(&lpm).unwrap();
        let types: Vec<&str> = place_types.values().map(String::as_str).collect();
        assert_eq!(types, ["order", "item"], "p0 sorts before p1");
    }

    #[test]
    fn missing_provenance_is_an_error() {
        let mut lpm = Lpm::from_place_nets([PlaceNet::new(["a"], ["b"], "order")]);
        lpm.provenance.clear();
        assert!(matches!(annotate_types(&lpm), Err(Error::ProvenanceMissing(_))));
    }

    #[test]
    fn diverged_structure_is_an_error() {
        let mut lpm = Lpm::from_place_nets([PlaceNet::new(["a"], ["b"], "order")]);
        let extra = lpm.net.add_transition("c", "c");
        lpm.net.add_arc(NetArc::TransitionToPlace(extra, PlaceId("p0".into())));
        assert!(matches!(annotate_types(&lpm), Err(Error::ProjectionMismatch(_))));
    }

    #[test]
    fn arcs_below_threshold_become_variable() {
        let log = log_with_item_counts(&[2, 1, 1, 1]);
        let covered: BTreeSet<String> =
            log.events().iter().map(|e| e.id.clone()).collect();
        let lpm = Lpm::from_place_nets([PlaceNet::new(["Place order"], ["Done"], "item")]);
        let place_types = annotate_types(&lpm).unwrap();
        let table = VarArcScoreTable::from_covered_events(&covered, &log);
        let (variable, warnings) = identify_variable_arcs(&lpm, &place_types, &table, 0.95);
        assert_eq!(
            variable,
            BTreeSet::from([NetArc::TransitionToPlace(
                crate::petri::TransitionId("Place order".into()),
                PlaceId("p0".into()),
            )]),
            "three of four is below the threshold"
        );
        assert_eq!(warnings.len(), 1, "no covered event executes Done");
        assert!(warnings[0].contains("\"Done\""));
    }

    #[test]
    fn arcs_at_or_above_threshold_stay_plain() {
        let log = log_with_item_counts(&[1, 1, 1, 1]);
        let covered: BTreeSet<String> =
            log.events().iter().map(|e| e.id.clone()).collect();
        let lpm = Lpm::from_place_nets([PlaceNet::new(["Place order"], ["Place order"], "item")]);
        let place_types = annotate_types(&lpm).unwrap();
        let table = VarArcScoreTable::from_covered_events(&covered, &log);
        let (variable, warnings) = identify_variable_arcs(&lpm, &place_types, &table, 0.95);
        assert!(variable.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn variable_flags_enter_the_signature() {
        let lpm = Lpm::from_place_nets([PlaceNet::new(["a"], ["b"], "order")]);
        let place_types = annotate_types(&lpm).unwrap();
        let base = Oclpm {
            net: lpm.net.clone(),
            place_types,
            variable_arcs: BTreeSet::new(),
            provenance: lpm.provenance.clone(),
            score: ModelScore { support: 0, coverage: 0.0, rank: 0.0 },
        };
        let mut flagged = base.clone();
        flagged.variable_arcs.insert(NetArc::TransitionToPlace(
            crate::petri::TransitionId("a".into()),
            PlaceId("p0".into()),
        ));
        assert_ne!(base.canonical_form(), flagged.canonical_form());
    }

    #[test]
    fn assembly_types_every_place_and_isolates_failures() {
        let log = generate_order_log(2, 2, 4).unwrap();
        let places = discover_all_places(&log, &OracleConfig::default()).unwrap();
        let slog = prepare_simple_log(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        let config = DiscoveryConfig {
            min_occurrences: 2,
            ..DiscoveryConfig::default()
        };
        let ranked = discover_lpms(&places, &slog, &config).unwrap();
        assert!(!ranked.is_empty(), "two orders leave enough structure");
        let (models, _) = assemble_oclpms(&ranked, &log, &config);
        assert_eq!(models.len(), ranked.len());
        for model in &models {
            assert_eq!(model.place_types.len(), model.net.places.len());
            for object_type in model.place_types.values() {
                assert!(log.object_types().contains(object_type));
            }
            for arc in &model.variable_arcs {
                assert!(model.net.arcs.contains(arc), "flags point at real arcs");
            }
            assert!((0.0..=1.0).contains(&model.score.coverage));
            assert!((0.0..=1.0).contains(&model.score.rank));
        }
    }
}
