//! DOT rendering of a single model.
//!
//! Transitions appear as boxes labeled with their activity, places as
//! filled circles whose color encodes the object type. The types of a model
//! are sorted and assigned colors from a fixed 12-color palette, cycling
//! when a model has more types than colors. Variable arcs are drawn with
//! `penwidth=3` and a `var` comment attribute. Node and edge lines are
//! emitted in a fixed sorted order, so the same model always renders to the
//! same text.
//!
//! When endpoints are requested, every place without a producer gets an `S`
//! ellipse of its type pointing at it, and every place without a consumer
//! points at an `E` ellipse of its type. These mark where objects enter and
//! leave the modeled fragment; they carry no replay semantics.

use oclpm::assembly::Oclpm;
use oclpm::petri::{NetArc, PlaceId, TransitionId};
use std::collections::{BTreeMap, BTreeSet};

const PALETTE: [&str; 12] = [
    "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c",
    "#fdbf6f", "#ff7f00", "#cab2d6", "#6a3d9a", "#ffff99", "#b15928",
];

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn place_node(place: &PlaceId) -> String {
    format!("\"p_{}\"", escape(&place.0))
}

fn transition_node(transition: &TransitionId) -> String {
    format!("\"t_{}\"", escape(&transition.0))
}

/// Renders one model as a DOT digraph.
pub fn render_dot(model: &Oclpm, show_endpoints: bool) -> String {
    let types: BTreeSet<&str> = model.place_types.values().map(String::as_str).collect();
    let colors: BTreeMap<&str, &str> = types
        .iter()
        .enumerate()
        .map(|(index, ty)| (*ty, PALETTE[index % PALETTE.len()]))
        .collect();
    let type_of = |place: &PlaceId| -> &str {
        model.place_types.get(place).map(String::as_str).unwrap_or("")
    };
    let color_of = |ty: &str| -> &str { colors.get(ty).copied().unwrap_or("#cccccc") };

    let mut out = String::new();
    out.push_str("digraph oclpm {\n");
    out.push_str("  rankdir=LR;\n");

    for transition in &model.net.transitions {
        let label = model.net.label_of(transition).unwrap_or(&transition.0);
        out.push_str(&format!(
            "  {} [shape=box, label=\"{}\"];\n",
            transition_node(transition),
            escape(label)
        ));
    }

    for place in &model.net.places {
        let ty = type_of(place);
        out.push_str(&format!(
            "  {} [shape=circle, style=filled, fillcolor=\"{}\", label=\"{}\", xlabel=\"{}\"];\n",
            place_node(place),
            color_of(ty),
            escape(&place.0),
            escape(ty)
        ));
    }

    let mut endpoint_edges = Vec::new();
    if show_endpoints {
        let mut entry_types = BTreeSet::new();
        let mut exit_types = BTreeSet::new();
        for place in &model.net.places {
            let ty = type_of(place);
            if model.net.producers_of(place).is_empty() {
                entry_types.insert(ty);
                endpoint_edges.push(format!("  \"s_{}\" -> {};\n", escape(ty), place_node(place)));
            }
            if model.net.consumers_of(place).is_empty() {
                exit_types.insert(ty);
                endpoint_edges.push(format!("  {} -> \"e_{}\";\n", place_node(place), escape(ty)));
            }
        }
        for ty in &entry_types {
            out.push_str(&format!(
                "  \"s_{}\" [shape=ellipse, style=filled, fillcolor=\"{}\", label=\"S\"];\n",
                escape(ty),
                color_of(ty)
            ));
        }
        for ty in &exit_types {
            out.push_str(&format!(
                "  \"e_{}\" [shape=ellipse, style=filled, fillcolor=\"{}\", label=\"E\"];\n",
                escape(ty),
                color_of(ty)
            ));
        }
    }

    for arc in &model.net.arcs {
        let (from, to) = match arc {
            NetArc::PlaceToTransition(place, transition) => {
                (place_node(place), transition_node(transition))
            }
            NetArc::TransitionToPlace(transition, place) => {
                (transition_node(transition), place_node(place))
            }
        };
        if model.variable_arcs.contains(arc) {
            out.push_str(&format!("  {from} -> {to} [penwidth=3, comment=\"var\"];\n"));
        } else {
            out.push_str(&format!("  {from} -> {to};\n"));
        }
    }
    for edge in endpoint_edges {
        out.push_str(&edge);
    }

    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use oclpm::assembly::ModelScore;
    use oclpm::lpm::Lpm;
    use oclpm::petri::PlaceNet;
    use std::collections::BTreeMap;

    fn model_from_places(places: Vec<PlaceNet>, variable: Vec<NetArc>) -> Oclpm {
        let lpm = Lpm::from_place_nets(places);
        let place_types: BTreeMap<PlaceId, String> = lpm
            .provenance
            .iter()
            .map(|(id, place)| (id.clone(), place.origin_type.clone()))
            .collect();
        Oclpm {
            net: lpm.net.clone(),
            place_types,
            variable_arcs: variable.into_iter().collect(),
            provenance: lpm.provenance,
            score: ModelScore { support: 1, coverage: 1.0, rank: 1.0 },
        }
    }

    fn count_containing(text: &str, needle: &str) -> usize {
        text.lines().filter(|line| line.contains(needle)).count()
    }

    #[test]
    fn single_place_net_has_two_boxes_one_circle_two_edges() {
        let model = model_from_places(
            vec![PlaceNet::new(["Place order"], ["Pick item"], "order")],
            vec![],
        );
        let text = render_dot(&model, false);
        assert_eq!(count_containing(&text, "shape=box"), 2, "one box per transition");
        assert_eq!(count_containing(&text, "shape=circle"), 1, "one circle per place");
        assert_eq!(count_containing(&text, " -> "), 2, "one edge per arc");
        assert!(text.starts_with("digraph oclpm {\n"), "digraph header present");
        assert!(text.ends_with("}\n"), "closing brace present");
    }

    #[test]
    fn one_variable_arc_yields_exactly_one_penwidth_line() {
        let model = model_from_places(
            vec![PlaceNet::new(["Place order"], ["Pick item", "Pack item"], "item")],
            vec![NetArc::TransitionToPlace(
                TransitionId("Place order".into()),
                PlaceId("p0".into()),
            )],
        );
        let text = render_dot(&model, false);
        assert_eq!(count_containing(&text, "penwidth=3"), 1, "exactly one thick edge");
        assert_eq!(count_containing(&text, "comment=\"var\""), 1, "var comment rides along");
    }

    #[test]
    fn endpoints_add_entry_and_exit_ellipses() {
        let model = model_from_places(
            vec![PlaceNet::new(["Place order"], ["Pick item"], "order")],
            vec![],
        );
        let without = render_dot(&model, false);
        assert_eq!(count_containing(&without, "shape=ellipse"), 0, "off by default");

        let chain_start = model_from_places(vec![PlaceNet::new(["a"], ["b"], "t")], vec![]);
        let text = render_dot(&chain_start, true);
        // p0 has both a producer and a consumer, so no endpoints appear.
        assert_eq!(count_containing(&text, "shape=ellipse"), 0, "fed places need no endpoints");

        let mut only_consumed = model_from_places(vec![PlaceNet::new(["a"], ["b"], "t")], vec![]);
        only_consumed.net.arcs = only_consumed
            .net
            .arcs
            .iter()
            .filter(|arc| matches!(arc, NetArc::PlaceToTransition(_, _)))
            .cloned()
            .collect();
        let text = render_dot(&only_consumed, true);
        assert_eq!(count_containing(&text, "shape=ellipse"), 1, "entry ellipse appears");
        assert!(text.contains("\"s_t\" -> \"p_p0\""), "entry points at the place");
    }

    #[test]
    fn types_color_deterministically_in_sorted_order() {
        let model = model_from_places(
            vec![
                PlaceNet::new(["a"], ["b"], "beta"),
                PlaceNet::new(["b"], ["c"], "alpha"),
            ],
            vec![],
        );
        let text = render_dot(&model, false);
        let alpha_line = text
            .lines()
            .find(|l| l.contains("xlabel=\"alpha\""))
            .expect("alpha place rendered");
        let beta_line = text
            .lines()
            .find(|l| l.contains("xlabel=\"beta\""))
            .expect("beta place rendered");
        assert!(alpha_line.contains(PALETTE[0]), "first sorted type takes the first color");
        assert!(beta_line.contains(PALETTE[1]), "second sorted type takes the second color");
        assert_eq!(render_dot(&model, false), text, "rendering is stable");
    }

    #[test]
    fn labels_with_quotes_are_escaped() {
        let model = model_from_places(
            vec![PlaceNet::new(["say \"hi\""], ["done"], "t")],
            vec![],
        );
        let text = render_dot(&model, false);
        assert!(
            text.contains("label=\"say \\\"hi\\\"\""),
            "double quotes inside labels are escaped"
        );
    }
}
