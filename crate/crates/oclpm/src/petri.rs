//! Petri net structures: single-place nets, labeled nets, token replay,
//! and canonical signatures used for deduplication.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

/// Identifier of a place inside one net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub String);

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a transition inside one net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub String);

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A directed arc of a labeled net. Nets are bipartite, so the two variants
/// cover every possible arc.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetArc {
    PlaceToTransition(PlaceId, TransitionId),
    TransitionToPlace(TransitionId, PlaceId),
}

/// A labeled Petri net. Transition labels are optional in the structure;
/// every constructor in this crate produces labeled transitions only.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledPetriNet {
    pub places: BTreeSet<PlaceId>,
    pub transitions: BTreeSet<TransitionId>,
    pub arcs: BTreeSet<NetArc>,
    pub labels: BTreeMap<TransitionId, Option<String>>,
}

impl LabeledPetriNet {
    pub fn add_place(&mut self, id: impl Into<String>) -> PlaceId {
        let id = PlaceId(id.into());
        self.places.insert(id.clone());
        id
    }

    pub fn add_transition(&mut self, id: impl Into<String>, label: impl Into<String>) -> TransitionId {
        let id = TransitionId(id.into());
        self.transitions.insert(id.clone());
        self.labels.insert(id.clone(), Some(label.into()));
        id
    }

    pub fn add_arc(&mut self, arc: NetArc) {
        self.arcs.insert(arc);
    }

    pub fn label_of(&self, transition: &TransitionId) -> Option<&str> {
        self.labels.get(transition).and_then(|l| l.as_deref())
    }

    pub fn transition_with_label(&self, label: &str) -> Option<&TransitionId> {
        self.labels
            .iter()
            .find(|(_, l)| l.as_deref() == Some(label))
            .map(|(id, _)| id)
    }

    /// Labels of transitions with an arc into `place`.
    pub fn producers_of(&self, place: &PlaceId) -> BTreeSet<String> {
        self.arcs
            .iter()
            .filter_map(|arc| match arc {
                NetArc::TransitionToPlace(t, p) if p == place => self.label_of(t),
                _ => None,
            })
            .map(String::from)
            .collect()
    }

    /// Labels of transitions with an arc out of `place`.
    pub fn consumers_of(&self, place: &PlaceId) -> BTreeSet<String> {
        self.arcs
            .iter()
            .filter_map(|arc| match arc {
                NetArc::PlaceToTransition(p, t) if p == place => self.label_of(t),
                _ => None,
            })
            .map(String::from)
            .collect()
    }

    /// Transitions connected to no place at all.
    pub fn isolated_transitions(&self) -> BTreeSet<&TransitionId> {
        let mut touched = BTreeSet::new();
        for arc in &self.arcs {
            match arc {
                NetArc::PlaceToTransition(_, t) | NetArc::TransitionToPlace(t, _) => {
                    touched.insert(t);
                }
            }
        }
        self.transitions.iter().filter(|t| !touched.contains(t)).collect()
    }

    /// Whether the underlying undirected graph over all places and
    /// transitions forms a single component. Empty nets count as connected.
    pub fn is_connected(&self) -> bool {
        #[derive(PartialEq, Eq, PartialOrd, Ord, Clone)]
        enum Node<'a> {
            P(&'a PlaceId),
            T(&'a TransitionId),
        }

        let mut adjacency: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
        for p in &self.places {
            adjacency.entry(Node::P(p)).or_default();
        }
        for t in &self.transitions {
            adjacency.entry(Node::T(t)).or_default();
        }
        for arc in &self.arcs {
            let (a, b) = match arc {
                NetArc::PlaceToTransition(p, t) => (Node::P(p), Node::T(t)),
                NetArc::TransitionToPlace(t, p) => (Node::P(p), Node::T(t)),
            };
            adjacency.get_mut(&a).unwrap().push(b.clone());
            adjacency.get_mut(&b).unwrap().push(a);
        }
        let Some(start) = adjacency.keys().next().cloned() else {
            return true;
        };
        let mut seen = BTreeSet::new();
        let mut queue = vec![start];
        while let Some(node) = queue.pop() {
            if !seen.insert(node.clone()) {
                continue;
            }
            for next in &adjacency[&node] {
                if !seen.contains(next) {
                    queue.push(next.clone());
                }
            }
        }
        seen.len() == adjacency.len()
    }

    /// Replays a label sequence by firing the transition carrying each
    /// label, starting and ending at the empty marking. Self-loops consume
    /// before they produce. Valid iff every label resolves to a transition,
    /// no place ever goes negative, and all places end empty.
    pub fn replay_labels(&self, sequence: &[&str]) -> LabeledReplay {
        let mut marking: BTreeMap<&PlaceId, i64> =
            self.places.iter().map(|p| (p, 0)).collect();
        let mut fired = BTreeSet::new();
        for label in sequence {
            let Some(transition) = self.transition_with_label(label) else {
                return LabeledReplay {
                    fits: false,
                    fired,
                };
            };
            for arc in &self.arcs {
                if let NetArc::PlaceToTransition(p, t) = arc {
                    if t == transition {
                        let count = marking.get_mut(p).unwrap();
                        if *count < 1 {
                            return LabeledReplay { fits: false, fired };
                        }
                        *count -= 1;
                    }
                }
            }
            for arc in &self.arcs {
                if let NetArc::TransitionToPlace(t, p) = arc {
                    if t == transition {
                        *marking.get_mut(p).unwrap() += 1;
                    }
                }
            }
            fired.insert(transition.clone());
        }
        LabeledReplay {
            fits: marking.values().all(|&c| c == 0),
            fired,
        }
    }
}

/// Outcome of [`LabeledPetriNet::replay_labels`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledReplay {
    pub fits: bool,
    pub fired: BTreeSet<TransitionId>,
}

/// Input and output activity label sets of one place of a labeled net.
pub fn project_place(net: &LabeledPetriNet, place: &PlaceId) -> (BTreeSet<String>, BTreeSet<String>) {
    (net.producers_of(place), net.consumers_of(place))
}

/// A net with exactly one place: activities in `inputs` produce a token,
/// activities in `outputs` consume one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlaceNet {
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    /// Object type of the flattened log the place was found on.
    pub origin_type: String,
}

impl PlaceNet {
    pub fn new(
        inputs: impl IntoIterator<Item = impl Into<String>>,
        outputs: impl IntoIterator<Item = impl Into<String>>,
        origin_type: impl Into<String>,
    ) -> Self {
        PlaceNet {
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
            origin_type: origin_type.into(),
        }
    }

    /// All activities adjacent to the place.
    pub fn activities(&self) -> BTreeSet<&str> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .map(String::as_str)
            .collect()
    }

    /// Token replay of an activity sequence against the single place.
    /// Activities adjacent on both sides consume before they produce, so a
    /// self-loop needs a token already present. Activities not adjacent to
    /// the place leave the marking unchanged.
    pub fn replay(&self, activities: &[&str]) -> ReplayVerdict {
        let mut count: i64 = 0;
        let mut underfed_at = None;
        for (i, activity) in activities.iter().enumerate() {
            let consumes = self.outputs.contains(*activity);
            let produces = self.inputs.contains(*activity);
            if consumes {
                if count < 1 {
                    underfed_at = Some(i);
                    break;
                }
                count -= 1;
            }
            if produces {
                count += 1;
            }
        }
        let overfed_count = if underfed_at.is_none() { count } else { 0 };
        ReplayVerdict {
            fits: underfed_at.is_none() && count == 0,
            underfed_at,
            overfed_count,
        }
    }

    /// Whether replaying `activities` moves the marking at all.
    pub fn activates(&self, activities: &[&str]) -> bool {
        activities
            .iter()
            .any(|a| self.inputs.contains(*a) || self.outputs.contains(*a))
    }

    /// The one-place labeled net this place denotes. The place is `p0`;
    /// transition ids equal their labels.
    pub fn denoted_net(&self) -> LabeledPetriNet {
        let mut net = LabeledPetriNet::default();
        let place = net.add_place("p0");
        for activity in self.activities() {
            let t = net.add_transition(activity, activity);
            if self.inputs.contains(activity) {
                net.add_arc(NetArc::TransitionToPlace(t.clone(), place.clone()));
            }
            if self.outputs.contains(activity) {
                net.add_arc(NetArc::PlaceToTransition(place.clone(), t));
            }
        }
        net
    }

    /// Signature of the place alone, without flags.
    pub fn signature(&self) -> String {
        place_signature(&self.inputs, &self.outputs, &self.origin_type, &BTreeSet::new())
    }
}

/// Outcome of replaying one trace against one place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayVerdict {
    pub fits: bool,
    /// Index of the first event that tried to consume from an empty place.
    pub underfed_at: Option<usize>,
    /// Tokens left behind when the trace ends (0 when it underfed).
    pub overfed_count: i64,
}

fn quoted_join(items: &BTreeSet<String>) -> String {
    items
        .iter()
        .map(|s| format!("{s:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Canonical signature of one place: quoted input labels, output labels,
/// place type, and flag strings, each part sorted.
pub fn place_signature(
    inputs: &BTreeSet<String>,
    outputs: &BTreeSet<String>,
    place_type: &str,
    flags: &BTreeSet<String>,
) -> String {
    format!(
        "({}|{}|{:?}|{})",
        quoted_join(inputs),
        quoted_join(outputs),
        place_type,
        quoted_join(flags)
    )
}

/// Canonical signature of a whole net from its per-place signatures plus
/// any isolated transition labels. Identifier renamings cannot change the
/// result because only labels, types, and flags enter it.
pub fn net_signature(mut place_signatures: Vec<String>, isolated_labels: &BTreeSet<String>) -> String {
    place_signatures.sort();
    let mut out = place_signatures.join(";");
    if !isolated_labels.is_empty() {
        out.push('#');
        out.push_str(&quoted_join(isolated_labels));
    }
    out
}
