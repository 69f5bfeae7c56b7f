//! Crate-wide error type.

use crate::event_log::Violation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A flatten or execution request named an object type the log does not have.
    #[error("unknown object type {requested:?}; known types: {known:?}")]
    UnknownObjectType { requested: String, known: Vec<String> },

    /// The synthetic execution type name is already taken by the input log.
    #[error("object type {0:?} is reserved for process executions but already present in the log")]
    ReservedTypeInUse(String),

    /// Leading-type grouping was asked for a type with no objects.
    #[error("leading type {0:?} has no objects")]
    EmptyLeadingType(String),

    #[error("invalid fixture arguments: {0}")]
    InvalidFixtureArgs(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The document is not well-formed JSON.
    #[error("JSON syntax error at byte {offset} (line {line}, column {column}): {message}")]
    JsonSyntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    /// Structurally invalid OCEL document (wrong node shape for a known key).
    #[error("malformed OCEL document: {0}")]
    Malformed(String),

    #[error("event {event_id:?} references undeclared object {object_id:?}")]
    UndeclaredObject { event_id: String, object_id: String },

    #[error("event {event_id:?} has unparseable timestamp {value:?}")]
    InvalidTimestamp { event_id: String, value: String },

    /// Attribute values must be scalars; arrays, objects, and null are rejected.
    #[error("event {event_id:?} attribute {key:?} is not a scalar value")]
    NonScalarAttribute { event_id: String, key: String },

    /// Writing was refused because the log fails validation.
    #[error("refusing to serialize an invalid log ({} violation{}; first: {})",
            .0.len(), if .0.len() == 1 { "" } else { "s" }, .0[0])]
    InvalidLog(Vec<Violation>),

    /// A model references a place whose provenance is missing from the
    /// discovered place-type table.
    #[error("place {0:?} has no matching entry in the place-type table")]
    ProvenanceMissing(String),

    /// A place's projection no longer matches the place net it came from.
    #[error("place {0:?} projection disagrees with its provenance place net")]
    ProjectionMismatch(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
