//! Object-centric event log data model.
//!
//! An [`EventLog`] holds events whose `omap` maps object types to sets of
//! object identifiers, plus an object table mapping each identifier to its
//! type. Construction never validates; [`EventLog::validate`] reports all
//! invariant violations of an arbitrary candidate log so callers can decide
//! what to do with a broken one.
//!
//! Event order is the timestamp order with event id as tiebreak. An explicit
//! order relation can be attached on input; it is validated against the
//! timestamps but never used to reorder events.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};

/// Scalar attribute value attached to an event.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    String(String),
    Integer(i64),
    Float(f64),
    Boolean(bool),
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::String(s) => write!(f, "{s}"),
            AttributeValue::Integer(i) => write!(f, "{i}"),
            AttributeValue::Float(x) => write!(f, "{x}"),
            AttributeValue::Boolean(b) => write!(f, "{b}"),
        }
    }
}

/// One event: an activity execution touching a set of objects per type.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub id: String,
    pub activity: String,
    pub timestamp: DateTime<Utc>,
    /// Object type -> non-empty set of object ids touched by this event.
    pub omap: BTreeMap<String, BTreeSet<String>>,
    pub vmap: BTreeMap<String, AttributeValue>,
}

impl Event {
    pub fn new(
        id: impl Into<String>,
        activity: impl Into<String>,
        timestamp: DateTime<Utc>,
        omap: BTreeMap<String, BTreeSet<String>>,
    ) -> Self {
        Event {
            id: id.into(),
            activity: activity.into(),
            timestamp,
            omap,
            vmap: BTreeMap::new(),
        }
    }

    /// All object ids the event touches, across types.
    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.omap.values().flatten().map(String::as_str)
    }

    /// Ids of one type, or empty.
    pub fn objects_of_type(&self, object_type: &str) -> impl Iterator<Item = &str> {
        self.omap
            .get(object_type)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    /// Sort key realizing the canonical event order.
    pub fn order_key(&self) -> (DateTime<Utc>, &str) {
        (self.timestamp, &self.id)
    }
}

/// A single invariant violation found by [`EventLog::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateEventId { event_id: String },
    EmptyEventId { position: usize },
    EmptyObjectSet { event_id: String, object_type: String },
    UnknownObject { event_id: String, object_id: String },
    ObjectTypeMismatch {
        event_id: String,
        object_id: String,
        claimed: String,
        declared: String,
    },
    ObjectUnderMultipleTypes { object_id: String, types: Vec<String> },
    OrderUnknownEvent { event_id: String },
    OrderTimestampInconsistency { first: String, second: String },
    OrderCycle { event_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateEventId { event_id } => {
                write!(f, "duplicate event id {event_id}")
            }
            Violation::EmptyEventId { position } => {
                write!(f, "event at position {position} has an empty id")
            }
            Violation::EmptyObjectSet { event_id, object_type } => {
                write!(f, "event {event_id} lists object type {object_type} with an empty object set")
            }
            Violation::UnknownObject { event_id, object_id } => {
                write!(f, "event {event_id} references unknown object {object_id}")
            }
            Violation::ObjectTypeMismatch { event_id, object_id, claimed, declared } => write!(
                f,
                "event {event_id} lists object {object_id} under type {claimed} but the object table declares {declared}"
            ),
            Violation::ObjectUnderMultipleTypes { object_id, types } => write!(
                f,
                "object {object_id} appears under multiple types: {}",
                types.join(", ")
            ),
            Violation::OrderUnknownEvent { event_id } => {
                write!(f, "order relation references unknown event {event_id}")
            }
            Violation::OrderTimestampInconsistency { first, second } => write!(
                f,
                "order/timestamp inconsistency: {first} precedes {second} but has a later timestamp"
            ),
            Violation::OrderCycle { event_id } => {
                write!(f, "order relation has a cycle through event {event_id}")
            }
        }
    }
}

/// An object-centric event log.
///
/// Events are stored in canonical order (timestamp, then id). The struct can
/// hold invalid data on purpose; run [`EventLog::validate`] to check it.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    events: Vec<Event>,
    /// Object id -> declared object type.
    objects: BTreeMap<String, String>,
    /// Declared types plus every type in the object table.
    object_types: BTreeSet<String>,
    /// Explicit order pairs (earlier, later), accepted on input and validated only.
    explicit_order: Vec<(String, String)>,
    /// Event id -> index of the first event carrying that id.
    index: HashMap<String, usize>,
}

impl EventLog {
    /// Builds a log from raw parts, sorting events into canonical order.
    pub fn from_parts(
        mut events: Vec<Event>,
        objects: BTreeMap<String, String>,
        declared_types: BTreeSet<String>,
        explicit_order: Vec<(String, String)>,
    ) -> Self {
        events.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        let mut object_types = declared_types;
        object_types.extend(objects.values().cloned());
        let mut index = HashMap::with_capacity(events.len());
        for (i, event) in events.iter().enumerate() {
            index.entry(event.id.clone()).or_insert(i);
        }
        EventLog {
            events,
            objects,
            object_types,
            explicit_order,
            index,
        }
    }

    /// Convenience constructor without declared types or explicit order.
    pub fn new(events: Vec<Event>, objects: BTreeMap<String, String>) -> Self {
        Self::from_parts(events, objects, BTreeSet::new(), Vec::new())
    }

    /// Events in canonical order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Object id -> type table.
    pub fn objects(&self) -> &BTreeMap<String, String> {
        &self.objects
    }

    pub fn object_types(&self) -> &BTreeSet<String> {
        &self.object_types
    }

    pub fn explicit_order(&self) -> &[(String, String)] {
        &self.explicit_order
    }

    /// Looks an event up by id. On valid logs ids are unique, so this is
    /// total and injective over the event set.
    pub fn event_by_id(&self, id: &str) -> Option<&Event> {
        self.index.get(id).map(|&i| &self.events[i])
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Checks every log invariant and returns all violations found.
    ///
    /// Checked invariants: unique non-empty event ids; omap object sets
    /// non-empty, resolving against the object table with matching types;
    /// each object id claimed under at most one type across the whole log;
    /// the explicit order (if any) references known events, respects
    /// timestamps, and is free of cycles among distinct events.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        // Event-local checks plus duplicate detection.
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let mut duplicates: BTreeSet<&str> = BTreeSet::new();
        for (position, event) in self.events.iter().enumerate() {
            if event.id.is_empty() {
                violations.push(Violation::EmptyEventId { position });
            } else if seen.insert(&event.id, position).is_some() {
                duplicates.insert(&event.id);
            }
            for (object_type, ids) in &event.omap {
                if ids.is_empty() {
                    violations.push(Violation::EmptyObjectSet {
                        event_id: event.id.clone(),
                        object_type: object_type.clone(),
                    });
                }
                for object_id in ids {
                    match self.objects.get(object_id) {
                        None => violations.push(Violation::UnknownObject {
                            event_id: event.id.clone(),
                            object_id: object_id.clone(),
                        }),
                        Some(declared) if declared != object_type => {
                            violations.push(Violation::ObjectTypeMismatch {
                                event_id: event.id.clone(),
                                object_id: object_id.clone(),
                                claimed: object_type.clone(),
                                declared: declared.clone(),
                            })
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        for event_id in duplicates {
            violations.push(Violation::DuplicateEventId {
                event_id: event_id.to_string(),
            });
        }

        // One type per object id across all omaps.
        let mut claimed_types: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for event in &self.events {
            for (object_type, ids) in &event.omap {
                for object_id in ids {
                    claimed_types
                        .entry(object_id)
                        .or_default()
                        .insert(object_type);
                }
            }
        }
        for (object_id, types) in claimed_types {
            if types.len() > 1 {
                violations.push(Violation::ObjectUnderMultipleTypes {
                    object_id: object_id.to_string(),
                    types: types.into_iter().map(String::from).collect(),
                });
            }
        }

        violations.extend(self.validate_explicit_order());
        violations
    }

    /// The explicit order pairs generate the order relation; the relation is
    /// a partial order exactly when the pairs are acyclic over distinct
    /// events, and it embeds into time when each pair respects timestamps.
    fn validate_explicit_order(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.explicit_order.is_empty() {
            return violations;
        }

        let mut unknown: BTreeSet<&str> = BTreeSet::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (first, second) in &self.explicit_order {
            let a = self.index.get(first.as_str());
            let b = self.index.get(second.as_str());
            if a.is_none() {
                unknown.insert(first);
            }
            if b.is_none() {
                unknown.insert(second);
            }
            if let (Some(&a), Some(&b)) = (a, b) {
                if a != b {
                    if self.events[a].timestamp > self.events[b].timestamp {
                        violations.push(Violation::OrderTimestampInconsistency {
                            first: first.clone(),
                            second: second.clone(),
                        });
                    }
                    edges.push((a, b));
                }
            }
        }
        for event_id in unknown {
            violations.push(Violation::OrderUnknownEvent {
                event_id: event_id.to_string(),
            });
        }

        // Cycle detection via iterative DFS with colors.
        let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(a, b) in &edges {
            adjacency.entry(a).or_default().push(b);
        }
        let mut color: HashMap<usize, u8> = HashMap::new(); // 1 = open, 2 = done
        let mut cyclic: BTreeSet<usize> = BTreeSet::new();
        for &start in adjacency.keys() {
            if color.get(&start).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color.insert(start, 1);
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                let neighbors = adjacency.get(&node).map(Vec::as_slice).unwrap_or(&[]);
                if *next < neighbors.len() {
                    let target = neighbors[*next];
                    *next += 1;
                    match color.get(&target).copied().unwrap_or(0) {
                        0 => {
                            color.insert(target, 1);
                            stack.push((target, 0));
                        }
                        1 => {
                            cyclic.insert(target);
                        }
                        _ => {}
                    }
                } else {
                    color.insert(node, 2);
                    stack.pop();
                }
            }
        }
        for node in cyclic {
            violations.push(Violation::OrderCycle {
                event_id: self.events[node].id.clone(),
            });
        }

        violations
    }
}

impl PartialEq for EventLog {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
            && self.objects == other.objects
            && self.object_types == other.object_types
            && self.explicit_order == other.explicit_order
    }
}

/// One case of a flattened log: the events touching a single object, in
/// canonical event order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn activities(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.activity.as_str()).collect()
    }
}

/// A flattened, single-perspective log: one trace per object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimpleEventLog {
    /// Traces sorted by case id.
    pub traces: Vec<Trace>,
    /// Union of all activities occurring in the traces.
    pub activity_alphabet: BTreeSet<String>,
}

impl SimpleEventLog {
    pub fn from_traces(mut traces: Vec<Trace>) -> Self {
        traces.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        let activity_alphabet = traces
            .iter()
            .flat_map(|t| t.events.iter().map(|e| e.activity.clone()))
            .collect();
        SimpleEventLog {
            traces,
            activity_alphabet,
        }
    }

    pub fn trace_count(&self) -> usize {
        self.traces.len()
    }

    /// Number of distinct event ids across all traces. Traces may share
    /// events, so this can be less than the sum of trace lengths.
    pub fn distinct_event_count(&self) -> usize {
        let mut ids: HashSet<&str> = HashSet::new();
        for trace in &self.traces {
            for event in &trace.events {
                ids.insert(&event.id);
            }
        }
        ids.len()
    }
}
