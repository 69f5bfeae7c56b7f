//! Reading and writing object-centric event logs.
//!
//! The on-disk format is the OCEL 1.0 JSON layout: a top-level object with
//! an `ocel:global-log` header, an `ocel:events` map keyed by event id, and
//! an `ocel:objects` map keyed by object id. Event object references
//! (`ocel:omap`) are flat id lists; each id is resolved against the object
//! table to recover its type, and an id the table does not declare is a
//! hard error.
//!
//! Parsing is strict about structure (malformed sections, bad timestamps,
//! non-scalar attribute values, and empty event ids are errors) but lenient
//! about extras: unknown keys and missing object maps are collected as
//! warnings in the returned [`ParseReport`].
//!
//! Writing is deterministic: events are emitted in canonical order
//! (timestamp, then id), object and attribute keys sorted, timestamps in
//! RFC 3339 UTC with just enough subsecond digits to be lossless. Parsing a
//! written log yields the original log back.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::event_log::{AttributeValue, Event, EventLog, SimpleEventLog};

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub warnings: Vec<String>,
}

const KEY_GLOBAL_LOG: &str = "ocel:global-log";
const KEY_GLOBAL_EVENT: &str = "ocel:global-event";
const KEY_GLOBAL_OBJECT: &str = "ocel:global-object";
const KEY_EVENTS: &str = "ocel:events";
const KEY_OBJECTS: &str = "ocel:objects";
const KEY_ACTIVITY: &str = "ocel:activity";
const KEY_TIMESTAMP: &str = "ocel:timestamp";
const KEY_OMAP: &str = "ocel:omap";
const KEY_VMAP: &str = "ocel:vmap";
const KEY_TYPE: &str = "ocel:type";
const KEY_OVMAP: &str = "ocel:ovmap";
const KEY_VERSION: &str = "ocel:version";
const KEY_ORDERING: &str = "ocel:ordering";
const KEY_ATTRIBUTE_NAMES: &str = "ocel:attribute-names";
const KEY_OBJECT_TYPES: &str = "ocel:object-types";

fn byte_offset(input: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    let mut remaining = line.saturating_sub(1);
    for (i, ch) in input.char_indices() {
        if remaining == 0 {
            break;
        }
        if ch == '\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    offset + column.saturating_sub(1)
}

fn parse_timestamp(event_id: &str, raw: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| Error::InvalidTimestamp {
            event_id: event_id.to_string(),
            value: raw.to_string(),
        })
}

fn scalar_attribute(event_id: &str, key: &str, value: &Value) -> Result<AttributeValue> {
    match value {
        Value::String(s) => Ok(AttributeValue::String(s.clone())),
        Value::Bool(b) => Ok(AttributeValue::Boolean(*b)),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(AttributeValue::Integer(i))
            } else if let Some(f) = n.as_f64() {
                Ok(AttributeValue::Float(f))
            } else {
                Err(Error::NonScalarAttribute {
                    event_id: event_id.to_string(),
                    key: key.to_string(),
                })
            }
        }
        _ => Err(Error::NonScalarAttribute {
            event_id: event_id.to_string(),
            key: key.to_string(),
        }),
    }
}

/// Parses an OCEL 1.0 JSON document into a log plus a report of everything
/// tolerated along the way. The returned log is not validated; run
/// [`EventLog::validate`] if the source is untrusted.
pub fn parse_ocel_json(input: &str) -> Result<(EventLog, ParseReport)> {
    let root: Value = serde_json::from_str(input).map_err(|e| Error::JsonSyntax {
        offset: byte_offset(input, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = root
        .as_object()
        .ok_or_else(|| Error::Malformed("top-level value must be an object".into()))?;

    let mut warnings = Vec::new();
    let mut declared_types = BTreeSet::new();

    match root.get(KEY_GLOBAL_LOG) {
        None => warnings.push(format!("missing {KEY_GLOBAL_LOG:?} section")),
        Some(Value::Object(global)) => {
            if let Some(version) = global.get(KEY_VERSION).and_then(Value::as_str) {
                if !version.starts_with("1.") {
                    warnings.push(format!("unexpected log version {version:?}"));
                }
            }
            match global.get(KEY_OBJECT_TYPES) {
                None | Some(Value::Array(_)) => {
                    for entry in global
                        .get(KEY_OBJECT_TYPES)
                        .and_then(Value::as_array)
                        .into_iter()
                        .flatten()
                    {
                        match entry.as_str() {
                            Some(t) => {
                                declared_types.insert(t.to_string());
                            }
                            None => warnings
                                .push(format!("ignored non-string entry in {KEY_OBJECT_TYPES:?}")),
                        }
                    }
                }
                Some(_) => warnings.push(format!("{KEY_OBJECT_TYPES:?} is not an array")),
            }
        }
        Some(_) => warnings.push(format!("{KEY_GLOBAL_LOG:?} is not an object")),
    }

    // Object table first; omaps resolve against it.
    let mut objects = BTreeMap::new();
    let mut unknown_object_keys: BTreeMap<String, usize> = BTreeMap::new();
    let object_section = root
        .get(KEY_OBJECTS)
        .ok_or_else(|| Error::Malformed(format!("missing {KEY_OBJECTS:?} section")))?
        .as_object()
        .ok_or_else(|| Error::Malformed(format!("{KEY_OBJECTS:?} must be an object")))?;
    for (object_id, body) in object_section {
        let body = body.as_object().ok_or_else(|| {
            Error::Malformed(format!("object {object_id:?} must be an object"))
        })?;
        let object_type = body
            .get(KEY_TYPE)
            .and_then(Value::as_str)
            .ok_or_else(|| {
                Error::Malformed(format!("object {object_id:?} is missing a string {KEY_TYPE:?}"))
            })?;
        objects.insert(object_id.clone(), object_type.to_string());
        for key in body.keys() {
            if key != KEY_TYPE && key != KEY_OVMAP {
                *unknown_object_keys.entry(key.clone()).or_insert(0) += 1;
            }
        }
    }

    let mut events = Vec::new();
    let mut unknown_event_keys: BTreeMap<String, usize> = BTreeMap::new();
    let mut missing_omaps = 0usize;
    let event_section = root
        .get(KEY_EVENTS)
        .ok_or_else(|| Error::Malformed(format!("missing {KEY_EVENTS:?} section")))?
        .as_object()
        .ok_or_else(|| Error::Malformed(format!("{KEY_EVENTS:?} must be an object")))?;
    for (event_id, body) in event_section {
        if event_id.is_empty() {
            return Err(Error::Malformed("event id must not be empty".into()));
        }
        let body = body.as_object().ok_or_else(|| {
            Error::Malformed(format!("event {event_id:?} must be an object"))
        })?;
        let activity = body
            .get(KEY_ACTIVITY)
            .and_then(Value::as_str)
            .ok_or_else(|| {
                Error::Malformed(format!(
                    "event {event_id:?} is missing a string {KEY_ACTIVITY:?}"
                ))
            })?;
        let raw_timestamp = body
            .get(KEY_TIMESTAMP)
            .and_then(Value::as_str)
            .ok_or_else(|| {
                Error::Malformed(format!(
                    "event {event_id:?} is missing a string {KEY_TIMESTAMP:?}"
                ))
            })?;
        let timestamp = parse_timestamp(event_id, raw_timestamp)?;

        let mut omap: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        match body.get(KEY_OMAP) {
            None => missing_omaps += 1,
            Some(Value::Array(ids)) => {
                for id in ids {
                    let object_id = id.as_str().ok_or_else(|| {
                        Error::Malformed(format!(
                            "event {event_id:?} has a non-string entry in {KEY_OMAP:?}"
                        ))
                    })?;
                    let object_type =
                        objects
                            .get(object_id)
                            .ok_or_else(|| Error::UndeclaredObject {
                                event_id: event_id.clone(),
                                object_id: object_id.to_string(),
                            })?;
                    omap.entry(object_type.clone())
                        .or_default()
                        .insert(object_id.to_string());
                }
            }
            Some(_) => {
                return Err(Error::Malformed(format!(
                    "event {event_id:?} has a non-array {KEY_OMAP:?}"
                )))
            }
        }

        let mut event = Event::new(event_id.clone(), activity, timestamp, omap);
        if let Some(vmap) = body.get(KEY_VMAP) {
            let vmap = vmap.as_object().ok_or_else(|| {
                Error::Malformed(format!("event {event_id:?} has a non-object {KEY_VMAP:?}"))
            })?;
            for (key, value) in vmap {
                event
                    .vmap
                    .insert(key.clone(), scalar_attribute(event_id, key, value)?);
            }
        }
        events.push(event);

        for key in body.keys() {
            if ![KEY_ACTIVITY, KEY_TIMESTAMP, KEY_OMAP, KEY_VMAP].contains(&key.as_str()) {
                *unknown_event_keys.entry(key.clone()).or_insert(0) += 1;
            }
        }
    }

    for key in root.keys() {
        if ![
            KEY_GLOBAL_LOG,
            KEY_GLOBAL_EVENT,
            KEY_GLOBAL_OBJECT,
            KEY_EVENTS,
            KEY_OBJECTS,
        ]
        .contains(&key.as_str())
        {
            warnings.push(format!("ignored unknown top-level key {key:?}"));
        }
    }
    if missing_omaps > 0 {
        warnings.push(format!(
            "{missing_omaps} event(s) have no {KEY_OMAP:?}; treated as empty"
        ));
    }
    for (key, count) in unknown_event_keys {
        warnings.push(format!("ignored unknown event key {key:?} on {count} event(s)"));
    }
    for (key, count) in unknown_object_keys {
        warnings.push(format!(
            "ignored unknown object key {key:?} on {count} object(s)"
        ));
    }

    let log = EventLog::from_parts(events, objects, declared_types, Vec::new());
    Ok((log, ParseReport { warnings }))
}

/// Reads and parses a file; see [`parse_ocel_json`].
pub fn parse_ocel_file(path: impl AsRef<Path>) -> Result<(EventLog, ParseReport)> {
    let input = std::fs::read_to_string(path)?;
    parse_ocel_json(&input)
}

fn format_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn attribute_to_json(value: &AttributeValue) -> Value {
    match value {
        AttributeValue::String(s) => Value::String(s.clone()),
        AttributeValue::Integer(i) => Value::Number((*i).into()),
        AttributeValue::Float(f) => Number::from_f64(*f).map(Value::Number).unwrap_or(Value::Null),
        AttributeValue::Boolean(b) => Value::Bool(*b),
    }
}

/// Serializes a log as pretty-printed OCEL 1.0 JSON. Output is a pure
/// function of the log: events appear in canonical order and all other
/// keys are sorted.
pub fn write_ocel_json(log: &EventLog) -> String {
    let attribute_names: BTreeSet<&String> =
        log.events().iter().flat_map(|e| e.vmap.keys()).collect();

    let mut global = Map::new();
    global.insert(KEY_VERSION.into(), Value::String("1.0".into()));
    global.insert(KEY_ORDERING.into(), Value::String("timestamp".into()));
    global.insert(
        KEY_ATTRIBUTE_NAMES.into(),
        Value::Array(
            attribute_names
                .into_iter()
                .map(|s| Value::String(s.clone()))
                .collect(),
        ),
    );
    global.insert(
        KEY_OBJECT_TYPES.into(),
        Value::Array(
            log.object_types()
                .iter()
                .map(|s| Value::String(s.clone()))
                .collect(),
        ),
    );

    let mut events = Map::new();
    for event in log.events() {
        let mut body = Map::new();
        body.insert(KEY_ACTIVITY.into(), Value::String(event.activity.clone()));
        body.insert(
            KEY_TIMESTAMP.into(),
            Value::String(format_timestamp(event.timestamp)),
        );
        body.insert(
            KEY_OMAP.into(),
            Value::Array(
                event
                    .objects()
                    .map(|id| Value::String(id.to_string()))
                    .collect(),
            ),
        );
        body.insert(
            KEY_VMAP.into(),
            Value::Object(
                event
                    .vmap
                    .iter()
                    .map(|(k, v)| (k.clone(), attribute_to_json(v)))
                    .collect(),
            ),
        );
        events.insert(event.id.clone(), Value::Object(body));
    }

    let mut objects = Map::new();
    for (object_id, object_type) in log.objects() {
        let mut body = Map::new();
        body.insert(KEY_TYPE.into(), Value::String(object_type.clone()));
        body.insert(KEY_OVMAP.into(), Value::Object(Map::new()));
        objects.insert(object_id.clone(), Value::Object(body));
    }

    let mut root = Map::new();
    root.insert(KEY_GLOBAL_LOG.into(), Value::Object(global));
    root.insert(KEY_EVENTS.into(), Value::Object(events));
    root.insert(KEY_OBJECTS.into(), Value::Object(objects));

    let mut out = serde_json::to_string_pretty(&Value::Object(root))
        .expect("log serialization cannot fail");
    out.push('\n');
    out
}

/// Writes a log to a file; see [`write_ocel_json`].
pub fn write_ocel_file(log: &EventLog, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(write_ocel_json(log).as_bytes())?;
    Ok(())
}

/// Exports a flattened log as CSV with columns
/// `case,activity,timestamp,event_id`, one row per trace event.
pub fn export_simple_log_csv<W: std::io::Write>(slog: &SimpleEventLog, writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["case", "activity", "timestamp", "event_id"])?;
    for trace in &slog.traces {
        for event in &trace.events {
            csv_writer.write_record([
                trace.case_id.as_str(),
                event.activity.as_str(),
                &format_timestamp(event.timestamp),
                event.id.as_str(),
            ])?;
        }
    }
    csv_writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::Trace;
    use crate::fixtures::{generate_order_log, generate_random_log};
    use chrono::TimeZone;

    const MINIMAL: &str = r#"{
        "ocel:global-log": {
            "ocel:version": "1.0",
            "ocel:ordering": "timestamp",
            "ocel:attribute-names": [],
            "ocel:object-types": ["order"]
        },
        "ocel:events": {
            "e1": {
                "ocel:activity": "Place order",
                "ocel:timestamp": "2024-03-01T08:00:00Z",
                "ocel:omap": ["o1"],
                "ocel:vmap": {"amount": 12.5, "count": 3, "rush": true, "note": "x"}
            }
        },
        "ocel:objects": {
            "o1": {"ocel:type": "order", "ocel:ovmap": {}}
        }
    }"#;

    #[test]
    fn minimal_document_parses() {
        let (log, report) = parse_ocel_json(MINIMAL).unwrap();
        assert!(report.warnings.is_empty(), "warnings: {:?}", report.warnings);
        assert_eq!(log.events().len(), 1);
        let event = &log.events()[0];
        assert_eq!(event.activity, "Place order");
        assert_eq!(event.objects_of_type("order").collect::<Vec<_>>(), ["o1"]);
        assert_eq!(event.vmap["amount"], AttributeValue::Float(12.5));
        assert_eq!(event.vmap["count"], AttributeValue::Integer(3));
        assert_eq!(event.vmap["rush"], AttributeValue::Boolean(true));
        assert_eq!(event.vmap["note"], AttributeValue::String("x".into()));
        assert!(log.validate().is_empty());
    }

    #[test]
    fn offsets_are_normalized_to_utc() {
        let doc = MINIMAL.replace("2024-03-01T08:00:00Z", "2024-03-01T10:00:00+02:00");
        let (log, _) = parse_ocel_json(&doc).unwrap();
        assert_eq!(
            log.events()[0].timestamp,
            Utc.with_ymd_and_hms(2024, 3, 1, 8, 0, 0).unwrap()
        );
    }

    #[test]
    fn undeclared_object_is_an_error() {
        let doc = MINIMAL.replace("[\"o1\"]", "[\"o1\", \"ghost\"]");
        match parse_ocel_json(&doc) {
            Err(Error::UndeclaredObject { event_id, object_id }) => {
                assert_eq!(event_id, "e1");
                assert_eq!(object_id, "ghost");
            }
            other => panic!("expected an undeclared-object error, got {other:?}"),
        }
    }

    #[test]
    fn nested_attribute_value_is_an_error() {
        let doc = MINIMAL.replace("\"note\": \"x\"", "\"note\": {\"deep\": 1}");
        assert!(matches!(
            parse_ocel_json(&doc),
            Err(Error::NonScalarAttribute { .. })
        ));
        let doc = MINIMAL.replace("\"note\": \"x\"", "\"note\": null");
        assert!(matches!(
            parse_ocel_json(&doc),
            Err(Error::NonScalarAttribute { .. })
        ));
    }

    #[test]
    fn bad_timestamp_is_an_error() {
        let doc = MINIMAL.replace("2024-03-01T08:00:00Z", "yesterday");
        match parse_ocel_json(&doc) {
            Err(Error::InvalidTimestamp { event_id, value }) => {
                assert_eq!(event_id, "e1");
                assert_eq!(value, "yesterday");
            }
            other => panic!("expected an invalid-timestamp error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_ocel_json("{\n  \"ocel:events\": }") {
            Err(Error::JsonSyntax { line, column, offset, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
                assert!(offset > 0);
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn empty_event_id_is_an_error() {
        let doc = MINIMAL.replace("\"e1\":", "\"\":");
        assert!(matches!(parse_ocel_json(&doc), Err(Error::Malformed(_))));
    }

    #[test]
    fn missing_omap_warns_and_parses_empty() {
        let doc = MINIMAL.replace("\"ocel:omap\": [\"o1\"],", "");
        let (log, report) = parse_ocel_json(&doc).unwrap();
        assert!(log.events()[0].omap.is_empty());
        assert_eq!(report.warnings.len(), 1);
        assert!(
            report.warnings[0].contains("treated as empty"),
            "got {:?}",
            report.warnings[0]
        );
    }

    #[test]
    fn unknown_keys_are_aggregated_warnings() {
        let doc = MINIMAL
            .replace("\"ocel:vmap\"", "\"x-custom\": 1, \"ocel:vmap\"")
            .replace("\"ocel:events\"", "\"x-top\": {}, \"ocel:events\"");
        let (_, report) = parse_ocel_json(&doc).unwrap();
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("\"x-top\"") && w.contains("top-level")));
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("\"x-custom\"") && w.contains("1 event(s)")));
    }

    #[test]
    fn write_then_parse_is_identity() {
        for log in [
            generate_order_log(3, 2, 5).unwrap(),
            generate_random_log(25, 3, 9).unwrap(),
        ] {
            let text = write_ocel_json(&log);
            let (reparsed, report) = parse_ocel_json(&text).unwrap();
            assert!(report.warnings.is_empty(), "warnings: {:?}", report.warnings);
            assert_eq!(reparsed, log);
        }
    }

    #[test]
    fn written_output_is_stable() {
        let log = generate_order_log(2, 2, 3).unwrap();
        assert_eq!(write_ocel_json(&log), write_ocel_json(&log.clone()));
    }

    #[test]
    fn subsecond_timestamps_survive_the_round_trip() {
        let doc = MINIMAL.replace("2024-03-01T08:00:00Z", "2024-03-01T08:00:00.123Z");
        let (log, _) = parse_ocel_json(&doc).unwrap();
        let (again, _) = parse_ocel_json(&write_ocel_json(&log)).unwrap();
        assert_eq!(again, log);
        assert!(write_ocel_json(&log).contains("2024-03-01T08:00:00.123Z"));
    }

    #[test]
    fn csv_export_layout() {
        let log = generate_order_log(1, 1, 2).unwrap();
        let trace = Trace {
            case_id: "i1_1".into(),
            events: log
                .events()
                .iter()
                .filter(|e| e.objects_of_type("item").next().is_some())
                .cloned()
                .collect(),
        };
        let slog = SimpleEventLog::from_traces(vec![trace]);
        let mut buffer = Vec::new();
        export_simple_log_csv(&slog, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "case,activity,timestamp,event_id");
        assert_eq!(lines.len(), 4, "header plus one row per item event");
        assert_eq!(lines[1], "i1_1,Place order,2024-03-01T08:00:00Z,e1");
        assert!(lines[2].starts_with("i1_1,Pick item,"));
        assert!(lines[3].starts_with("i1_1,Pack item,"));
    }
}
