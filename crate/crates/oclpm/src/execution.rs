//! Flattening and process executions.
//!
//! Flattening projects an object-centric log onto one object type: one
//! trace per object, holding the events that touch it. Process executions
//! group events end to end, either as connected components of the object
//! interaction graph or around the objects of a chosen leading type. An
//! assignment can be materialized as a synthetic object type so the rest of
//! the pipeline can treat whole executions as ordinary cases.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::event_log::{EventLog, SimpleEventLog, Trace};

/// Reserved object type under which executions are materialized.
pub const EXECUTION_TYPE: &str = "__execution";

/// Projects the log onto `object_type`: one trace per object of that type
/// (objects without events yield empty traces), each trace holding its
/// object's events in log order.
pub fn flatten(log: &EventLog, object_type: &str) -> Result<SimpleEventLog> {
    if !log.object_types().contains(object_type) {
        return Err(Error::UnknownObjectType {
            requested: object_type.to_string(),
            known: log.object_types().iter().cloned().collect(),
        });
    }
    let mut per_object: BTreeMap<&str, Trace> = log
        .objects()
        .iter()
        .filter(|(_, t)| t.as_str() == object_type)
        .map(|(id, _)| {
            (
                id.as_str(),
                Trace {
                    case_id: id.clone(),
                    events: Vec::new(),
                },
            )
        })
        .collect();
    for event in log.events() {
        for object_id in event.objects_of_type(object_type) {
            if let Some(trace) = per_object.get_mut(object_id) {
                trace.events.push(event.clone());
            }
        }
    }
    Ok(SimpleEventLog::from_traces(
        per_object.into_values().collect(),
    ))
}

/// Undirected graph over objects; two objects are adjacent iff some event
/// touches both.
#[derive(Debug, Clone, Default)]
pub struct InteractionGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl InteractionGraph {
    pub fn from_log(log: &EventLog) -> Self {
        let mut adjacency: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for event in log.events() {
            let ids: Vec<&str> = event.objects().collect();
            for id in &ids {
                adjacency.entry(id.to_string()).or_default();
            }
            for (i, a) in ids.iter().enumerate() {
                for b in &ids[i + 1..] {
                    if a != b {
                        adjacency.get_mut(*a).unwrap().insert(b.to_string());
                        adjacency.get_mut(*b).unwrap().insert(a.to_string());
                    }
                }
            }
        }
        InteractionGraph { adjacency }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn contains(&self, object_id: &str) -> bool {
        self.adjacency.contains_key(object_id)
    }

    pub fn neighbors(&self, object_id: &str) -> impl Iterator<Item = &str> {
        self.adjacency
            .get(object_id)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }
}

/// How events are grouped into process executions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecutionStrategy {
    /// One execution per connected component of the interaction graph.
    ConnectedComponents,
    /// One execution per object of the named type; every other object joins
    /// the executions of its nearest leading objects in the interaction
    /// graph.
    LeadingType(String),
}

/// One process execution: its objects and the ids of its events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecutionGroup {
    pub objects: BTreeSet<String>,
    pub events: BTreeSet<String>,
}

/// Result of grouping a log into executions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionAssignment {
    pub strategy: ExecutionStrategy,
    /// Execution id -> group. Ids are `exec_<n>`, numbered by each group's
    /// smallest object id.
    pub executions: BTreeMap<String, ExecutionGroup>,
    /// Ids of events that belong to no execution, in log order.
    pub unassigned_events: Vec<String>,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

fn number_groups(groups: Vec<ExecutionGroup>) -> BTreeMap<String, ExecutionGroup> {
    let mut keyed: Vec<(String, ExecutionGroup)> = groups
        .into_iter()
        .map(|g| {
            let min = g.objects.iter().next().cloned().unwrap_or_default();
            (min, g)
        })
        .collect();
    keyed.sort_by(|a, b| (&a.0, &a.1.objects).cmp(&(&b.0, &b.1.objects)));
    keyed
        .into_iter()
        .enumerate()
        .map(|(n, (_, g))| (format!("exec_{n}"), g))
        .collect()
}

fn connected_component_groups(log: &EventLog) -> (Vec<ExecutionGroup>, Vec<String>) {
    let mut object_index: HashMap<&str, usize> = HashMap::new();
    let mut object_names: Vec<&str> = Vec::new();
    for event in log.events() {
        for id in event.objects() {
            object_index.entry(id).or_insert_with(|| {
                object_names.push(id);
                object_names.len() - 1
            });
        }
    }

    let mut uf = UnionFind::new(object_names.len());
    let mut unassigned = Vec::new();
    for event in log.events() {
        let ids: Vec<usize> = event.objects().map(|id| object_index[id]).collect();
        if ids.is_empty() {
            unassigned.push(event.id.clone());
            continue;
        }
        for &other in &ids[1..] {
            uf.union(ids[0], other);
        }
    }

    let mut by_root: BTreeMap<usize, ExecutionGroup> = BTreeMap::new();
    for (idx, name) in object_names.iter().enumerate() {
        by_root
            .entry(uf.find(idx))
            .or_default()
            .objects
            .insert(name.to_string());
    }
    for event in log.events() {
        if let Some(first) = event.objects().next() {
            let root = uf.find(object_index[first]);
            by_root
                .get_mut(&root)
                .unwrap()
                .events
                .insert(event.id.clone());
        }
    }
    (by_root.into_values().collect(), unassigned)
}

fn leading_type_groups(
    log: &EventLog,
    leading_type: &str,
) -> Result<(Vec<ExecutionGroup>, Vec<String>)> {
    if !log.object_types().contains(leading_type) {
        return Err(Error::UnknownObjectType {
            requested: leading_type.to_string(),
            known: log.object_types().iter().cloned().collect(),
        });
    }
    let leaders: Vec<&str> = log
        .objects()
        .iter()
        .filter(|(_, t)| t.as_str() == leading_type)
        .map(|(id, _)| id.as_str())
        .collect();
    if leaders.is_empty() {
        return Err(Error::EmptyLeadingType(leading_type.to_string()));
    }

    // Layered multi-source BFS. Each object ends up with the set of leading
    // objects at minimal graph distance; whole layers settle at once so tied
    // leaders are all kept.
    let graph = InteractionGraph::from_log(log);
    let mut nearest: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut frontier: Vec<&str> = Vec::new();
    for &leader in &leaders {
        if graph.contains(leader) {
            nearest.insert(leader, BTreeSet::from([leader]));
            frontier.push(leader);
        }
    }
    while !frontier.is_empty() {
        let mut pending: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for &node in &frontier {
            let sources = nearest[node].clone();
            for neighbor in graph.neighbors(node) {
                if !nearest.contains_key(neighbor) {
                    pending.entry(neighbor).or_default().extend(&sources);
                }
            }
        }
        frontier = pending.keys().copied().collect();
        for (node, sources) in pending {
            nearest.insert(node, sources);
        }
    }

    let mut groups: BTreeMap<&str, ExecutionGroup> = leaders
        .iter()
        .map(|&l| {
            let mut g = ExecutionGroup::default();
            g.objects.insert(l.to_string());
            (l, g)
        })
        .collect();
    for (object, sources) in &nearest {
        for leader in sources {
            groups.get_mut(leader).unwrap().objects.insert(object.to_string());
        }
    }

    let mut membership: HashMap<&str, Vec<&str>> = HashMap::new();
    for (leader, group) in &groups {
        for object in &group.objects {
            membership.entry(object.as_str()).or_default().push(leader);
        }
    }
    let mut unassigned = Vec::new();
    let mut leaders_of_event: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for event in log.events() {
        let mut touched: BTreeSet<&str> = BTreeSet::new();
        for object in event.objects() {
            if let Some(ls) = membership.get(object) {
                touched.extend(ls.iter().copied());
            }
        }
        if touched.is_empty() {
            unassigned.push(event.id.clone());
        } else {
            leaders_of_event.insert(&event.id, touched);
        }
    }
    for (event_id, ls) in leaders_of_event {
        for leader in ls {
            groups
                .get_mut(leader)
                .unwrap()
                .events
                .insert(event_id.to_string());
        }
    }
    Ok((groups.into_values().collect(), unassigned))
}

/// Groups the log's events into process executions under the given
/// strategy.
pub fn assign_executions(
    log: &EventLog,
    strategy: ExecutionStrategy,
) -> Result<ExecutionAssignment> {
    let (groups, unassigned_events) = match &strategy {
        ExecutionStrategy::ConnectedComponents => connected_component_groups(log),
        ExecutionStrategy::LeadingType(t) => leading_type_groups(log, t)?,
    };
    Ok(ExecutionAssignment {
        strategy,
        executions: number_groups(groups),
        unassigned_events,
    })
}

/// Returns a copy of the log where each execution is an object of the
/// reserved type [`EXECUTION_TYPE`], attached to all of its events. Fails
/// if the log already uses the reserved type.
pub fn augment_with_executions(
    log: &EventLog,
    assignment: &ExecutionAssignment,
) -> Result<EventLog> {
    if log.object_types().contains(EXECUTION_TYPE) {
        return Err(Error::ReservedTypeInUse(EXECUTION_TYPE.to_string()));
    }
    let mut execs_of_event: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (exec_id, group) in &assignment.executions {
        for event_id in &group.events {
            execs_of_event
                .entry(event_id)
                .or_default()
                .insert(exec_id);
        }
    }

    let mut events = log.events().to_vec();
    for event in &mut events {
        if let Some(execs) = execs_of_event.get(event.id.as_str()) {
            event.omap.insert(
                EXECUTION_TYPE.to_string(),
                execs.iter().map(|s| s.to_string()).collect(),
            );
        }
    }
    let mut objects = log.objects().clone();
    for exec_id in assignment.executions.keys() {
        objects.insert(exec_id.clone(), EXECUTION_TYPE.to_string());
    }
    let mut declared = log.object_types().clone();
    declared.insert(EXECUTION_TYPE.to_string());
    Ok(EventLog::from_parts(
        events,
        objects,
        declared,
        log.explicit_order().to_vec(),
    ))
}

/// Convenience: assigns executions, materializes them, and flattens on the
/// execution type. The result has one trace per process execution.
pub fn prepare_simple_log(log: &EventLog, strategy: ExecutionStrategy) -> Result<SimpleEventLog> {
    let assignment = assign_executions(log, strategy)?;
    let augmented = augment_with_executions(log, &assignment)?;
    flatten(&augmented, EXECUTION_TYPE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::Event;
    use crate::fixtures::{generate_order_log, generate_random_log};
    use chrono::{TimeZone, Utc};

    #[test]
    fn flattening_on_items_keeps_placement_events() {
        let log = generate_order_log(1, 1, 2).unwrap();
        let slog = flatten(&log, "item").unwrap();
        assert_eq!(slog.trace_count(), 1);
        assert_eq!(
            slog.traces[0].activities(),
            ["Place order", "Pick item", "Pack item"],
            "the item is attached from placement through packing"
        );
    }

    #[test]
    fn flattening_unknown_type_lists_known_types() {
        let log = generate_order_log(1, 1, 2).unwrap();
        match flatten(&log, "invoice") {
            Err(Error::UnknownObjectType { requested, known }) => {
                assert_eq!(requested, "invoice");
                assert_eq!(known, ["item", "order", "package"]);
            }
            other => panic!("expected an unknown-type error, got {other:?}"),
        }
    }

    #[test]
    fn flattening_conserves_event_object_pairs() {
        let log = generate_random_log(60, 3, 3).unwrap();
        for object_type in log.object_types().clone() {
            let slog = flatten(&log, &object_type).unwrap();
            let total: usize = slog.traces.iter().map(|t| t.events.len()).sum();
            let expected: usize = log
                .events()
                .iter()
                .map(|e| e.objects_of_type(&object_type).count())
                .sum();
            assert_eq!(total, expected, "type {object_type} loses or invents events");
        }
    }

    #[test]
    fn components_separate_independent_orders() {
        let log = generate_order_log(2, 2, 4).unwrap();
        let assignment =
            assign_executions(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        assert_eq!(assignment.executions.len(), 2);
        assert!(assignment.unassigned_events.is_empty());
        let mut event_counts: Vec<usize> = assignment
            .executions
            .values()
            .map(|g| g.events.len())
            .collect();
        event_counts.sort_unstable();
        assert_eq!(event_counts, [4, 6]);
        let mut object_counts: Vec<usize> = assignment
            .executions
            .values()
            .map(|g| g.objects.len())
            .collect();
        object_counts.sort_unstable();
        assert_eq!(object_counts, [3, 4]);
    }

    #[test]
    fn component_grouping_matches_flood_fill() {
        let log = generate_random_log(50, 3, 21).unwrap();
        let assignment =
            assign_executions(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        let ours: BTreeSet<BTreeSet<String>> = assignment
            .executions
            .values()
            .map(|g| g.objects.clone())
            .collect();

        // Independent recomputation by breadth-first flood fill.
        let graph = InteractionGraph::from_log(&log);
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut components: BTreeSet<BTreeSet<String>> = BTreeSet::new();
        for start in graph.nodes() {
            if seen.contains(start) {
                continue;
            }
            let mut component = BTreeSet::new();
            let mut queue = vec![start];
            while let Some(node) = queue.pop() {
                if !seen.insert(node) {
                    continue;
                }
                component.insert(node.to_string());
                queue.extend(graph.neighbors(node));
            }
            components.insert(component);
        }
        assert_eq!(ours, components);
    }

    #[test]
    fn events_without_objects_stay_unassigned() {
        let ts = Utc.with_ymd_and_hms(2024, 3, 1, 8, 0, 0).unwrap();
        let log = EventLog::new(
            vec![
                Event::new("e1", "a", ts, BTreeMap::from([("t0".to_string(), BTreeSet::from(["x".to_string()]))])),
                Event::new("e2", "b", ts + chrono::Duration::seconds(1), BTreeMap::new()),
            ],
            BTreeMap::from([("x".to_string(), "t0".to_string())]),
        );
        let assignment =
            assign_executions(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        assert_eq!(assignment.unassigned_events, ["e2"]);
        assert_eq!(assignment.executions.len(), 1);
    }

    #[test]
    fn leading_orders_recover_the_component_partition() {
        let log = generate_order_log(2, 2, 4).unwrap();
        let by_components =
            assign_executions(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        let by_leading =
            assign_executions(&log, ExecutionStrategy::LeadingType("order".into())).unwrap();
        assert_eq!(
            by_components.executions, by_leading.executions,
            "per-order components and order-led executions coincide on this log"
        );
    }

    #[test]
    fn tied_objects_join_every_nearest_leader() {
        let log = generate_order_log(1, 2, 7).unwrap();
        let assignment =
            assign_executions(&log, ExecutionStrategy::LeadingType("item".into())).unwrap();
        assert_eq!(assignment.executions.len(), 2, "one execution per item");
        for group in assignment.executions.values() {
            assert!(group.objects.contains("o1"), "the order is adjacent to both items");
            assert!(group.objects.contains("pk1"), "the package is adjacent to both items");
            assert_eq!(group.events.len(), 6, "every event reaches both executions");
        }
    }

    #[test]
    fn unknown_leading_type_is_an_error() {
        let log = generate_order_log(1, 1, 2).unwrap();
        assert!(matches!(
            assign_executions(&log, ExecutionStrategy::LeadingType("ghost".into())),
            Err(Error::UnknownObjectType { .. })
        ));
    }

    #[test]
    fn leading_type_without_objects_is_an_error() {
        let ts = Utc.with_ymd_and_hms(2024, 3, 1, 8, 0, 0).unwrap();
        let log = EventLog::from_parts(
            vec![Event::new(
                "e1",
                "a",
                ts,
                BTreeMap::from([("t0".to_string(), BTreeSet::from(["x".to_string()]))]),
            )],
            BTreeMap::from([("x".to_string(), "t0".to_string())]),
            BTreeSet::from(["t0".to_string(), "unused".to_string()]),
            Vec::new(),
        );
        assert!(matches!(
            assign_executions(&log, ExecutionStrategy::LeadingType("unused".into())),
            Err(Error::EmptyLeadingType(t)) if t == "unused"
        ));
    }

    #[test]
    fn reserved_type_cannot_be_augmented_twice() {
        let log = generate_order_log(1, 1, 2).unwrap();
        let assignment =
            assign_executions(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        let augmented = augment_with_executions(&log, &assignment).unwrap();
        assert!(matches!(
            augment_with_executions(&augmented, &assignment),
            Err(Error::ReservedTypeInUse(_))
        ));
    }

    #[test]
    fn augmented_logs_stay_valid() {
        let log = generate_order_log(3, 2, 8).unwrap();
        let assignment =
            assign_executions(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        let augmented = augment_with_executions(&log, &assignment).unwrap();
        assert!(augmented.validate().is_empty());
        assert!(augmented.object_types().contains(EXECUTION_TYPE));
    }

    #[test]
    fn prepared_log_has_one_trace_per_execution() {
        let log = generate_order_log(2, 2, 4).unwrap();
        let slog = prepare_simple_log(&log, ExecutionStrategy::ConnectedComponents).unwrap();
        assert_eq!(slog.trace_count(), 2);
        let case_ids: Vec<&str> = slog.traces.iter().map(|t| t.case_id.as_str()).collect();
        assert_eq!(case_ids, ["exec_0", "exec_1"]);
        let mut lengths: Vec<usize> = slog.traces.iter().map(|t| t.events.len()).collect();
        lengths.sort_unstable();
        assert_eq!(lengths, [4, 6]);
    }
}
