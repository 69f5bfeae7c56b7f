//! Command-line pipeline around the [`oclpm`] library.
//!
//! The binary parses an OCEL JSON log, discovers object-centric local
//! process models, and exports them as JSON and optionally as DOT drawings.
//! [`pipeline`] orchestrates the phases, [`models_json`] defines the export
//! schema, and [`dot`] renders single models.

pub mod dot;
pub mod models_json;
pub mod pipeline;
