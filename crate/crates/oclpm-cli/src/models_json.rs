//! JSON export of discovered models.
//!
//! The export is a JSON array with one record per model:
//!
//! ```json
//! [
//!   {
//!     "places": [
//!       {"id": "p0", "type": "order", "inputs": ["Place order"], "outputs": ["Pick item"]}
//!     ],
//!     "transitions": ["Pick item", "Place order"],
//!     "arcs": [
//!       {"from": "Place order", "to": "p0", "variable": true},
//!       {"from": "p0", "to": "Pick item", "variable": false}
//!     ],
//!     "score": {"support": 19, "coverage": 0.88, "rank": 0.91}
//!   }
//! ]
//! ```
//!
//! Place ids are local to their record. Arc endpoints name either a place id
//! or a transition label, and the pair is ordered in flow direction. All
//! lists are emitted in a fixed sorted order, so equal models always
//! serialize to identical text.

use oclpm::assembly::Oclpm;
use oclpm::petri::{project_place, NetArc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub places: Vec<PlaceRecord>,
    pub transitions: Vec<String>,
    pub arcs: Vec<ArcRecord>,
    pub score: ScoreRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub id: String,
    #[serde(rename = "type")]
    pub object_type: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub from: String,
    pub to: String,
    pub variable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub support: usize,
    pub coverage: f64,
    pub rank: f64,
}

/// Flattens one model into its export record.
pub fn model_record(model: &Oclpm) -> ModelRecord {
    let places = model
        .net
        .places
        .iter()
        .map(|place| {
            let (inputs, outputs) = project_place(&model.net, place);
            PlaceRecord {
                id: place.0.clone(),
                object_type: model
                    .place_types
                    .get(place)
                    .cloned()
                    .unwrap_or_default(),
                inputs: inputs.into_iter().collect(),
                outputs: outputs.into_iter().collect(),
            }
        })
        .collect();

    let transitions = model
        .net
        .transitions
        .iter()
        .map(|t| model.net.label_of(t).unwrap_or(&t.0).to_string())
        .collect();

    let arcs = model
        .net
        .arcs
        .iter()
        .map(|arc| {
            let (from, to) = match arc {
                NetArc::PlaceToTransition(place, transition) => (
                    place.0.clone(),
                    model.net.label_of(transition).unwrap_or(&transition.0).to_string(),
                ),
                NetArc::TransitionToPlace(transition, place) => (
                    model.net.label_of(transition).unwrap_or(&transition.0).to_string(),
                    place.0.clone(),
                ),
            };
            ArcRecord {
                from,
                to,
                variable: model.variable_arcs.contains(arc),
            }
        })
        .collect();

    ModelRecord {
        places,
        transitions,
        arcs,
        score: ScoreRecord {
            support: model.score.support,
            coverage: model.score.coverage,
            rank: model.score.rank,
        },
    }
}

/// Serializes records as pretty-printed JSON with a trailing newline.
pub fn render(records: &[ModelRecord]) -> String {
    let mut text = serde_json::to_string_pretty(records).expect("model records serialize");
    text.push('\n');
    text
}

/// Reads records back from the text produced by [`render`].
pub fn parse(input: &str) -> serde_json::Result<Vec<ModelRecord>> {
    serde_json::from_str(input)
}
