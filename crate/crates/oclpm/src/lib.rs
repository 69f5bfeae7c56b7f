//! Discovery of object-centric local process models (OCLPMs) from
//! object-centric event logs.
//!
//! The pipeline has two halves. The preparation half runs a place-net
//! oracle per object type on the flattened log and groups objects into
//! process executions; the discovery half searches for local models by
//! combining place nets, matches them against the execution-flattened
//! log, and annotates the survivors with object types and variable arcs.
//!
//! Modules follow the pipeline order:
//!
//! - [`event_log`]: the object-centric log data model and its validator
//! - [`fixtures`]: deterministic synthetic logs for tests and demos
//! - [`io`]: OCEL 1.0 JSON reading/writing and CSV export
//! - [`execution`]: flattening and process-execution extraction
//! - [`petri`]: labeled Petri nets, place nets, replay, canonical forms
//! - [`oracle`]: the enumerate-and-replay place-net oracle
//! - [`lpm`]: window-anchored matching and the combination search
//! - [`assembly`]: type annotation and variable-arc identification

pub mod assembly;
pub mod error;
pub mod event_log;
pub mod execution;
pub mod fixtures;
pub mod io;
pub mod lpm;
pub mod oracle;
pub mod petri;

pub use error::{Error, Result};
