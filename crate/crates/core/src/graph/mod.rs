//! Flat control-flow graph view of a model and the change primitives that
//! edit it.
//!
//! Primitives operate without any structural guarantee; [`check_soundness`]
//! decides afterwards whether the edited graph is still the lowering of some
//! block-structured model.

mod lower;
mod reduce;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Condition, Label};

pub use lower::{graph_ids, to_graph};
pub use reduce::{check_soundness, from_graph, Finding, GraphError, SoundnessCode, SoundnessReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraphNodeId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphNodeKind {
    Start,
    End,
    Activity { label: Label },
    AndSplit,
    AndJoin,
    XorSplit,
    XorJoin,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: GraphNodeId,
    #[serde(flatten)]
    pub kind: GraphNodeKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: GraphNodeId,
    pub to: GraphNodeId,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "present")]
    pub condition: Option<Condition>,
}

fn present<'de, D: serde::Deserializer<'de>>(deserializer: D) -> Result<Option<Condition>, D::Error> {
    Condition::deserialize(deserializer).map(Some)
}

/// Directed graph with at most one edge per ordered node pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphDoc", try_from = "GraphDoc")]
pub struct FlatGraph {
    nodes: BTreeMap<GraphNodeId, GraphNode>,
    edges: BTreeMap<(GraphNodeId, GraphNodeId), Option<Condition>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<GraphNode>,
    edges: Vec<Edge>,
}

impl From<FlatGraph> for GraphDoc {
    fn from(graph: FlatGraph) -> GraphDoc {
        GraphDoc { nodes: graph.nodes().cloned().collect(), edges: graph.edges().collect() }
    }
}

impl TryFrom<GraphDoc> for FlatGraph {
    type Error = PrimitiveError;

    fn try_from(doc: GraphDoc) -> Result<FlatGraph, PrimitiveError> {
        let mut graph = FlatGraph::default();
        for node in doc.nodes {
            graph.apply(&Primitive::AddNode { node })?;
        }
        for edge in doc.edges {
            graph.apply(&Primitive::AddEdge { edge })?;
        }
        Ok(graph)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PrimitiveError {
    #[error("unknown node {}", .0.0)]
    UnknownNode(GraphNodeId),
    #[error("unknown edge {} -> {}", .0.0, .1.0)]
    UnknownEdge(GraphNodeId, GraphNodeId),
    #[error("node {} already exists", .0.0)]
    DuplicateId(GraphNodeId),
    #[error("edge {} -> {} already exists", .0.0, .1.0)]
    DuplicateEdge(GraphNodeId, GraphNodeId),
}

/// A low-level graph edit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Primitive {
    AddNode { node: GraphNode },
    /// Removes the node together with its incident edges.
    DeleteNode { id: GraphNodeId },
    AddEdge { edge: Edge },
    DeleteEdge { from: GraphNodeId, to: GraphNodeId },
    UpdateEdgeCondition { from: GraphNodeId, to: GraphNodeId, condition: Option<Condition> },
}

impl FlatGraph {
    /// The graph of the empty model: `start -> end`.
    pub fn trivial() -> FlatGraph {
        let mut graph = FlatGraph::default();
        graph.insert_node(GraphNodeId(0), GraphNodeKind::Start);
        graph.insert_node(GraphNodeId(1), GraphNodeKind::End);
        graph.insert_edge(GraphNodeId(0), GraphNodeId(1), None);
        graph
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: GraphNodeId) -> Option<&GraphNode> {
        self.nodes.get(&id)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(from, to), condition)| Edge { from, to, condition: condition.clone() })
    }

    pub fn edge(&self, from: GraphNodeId, to: GraphNodeId) -> Option<Edge> {
        self.edges.get(&(from, to)).map(|condition| Edge { from, to, condition: condition.clone() })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn outgoing(&self, id: GraphNodeId) -> impl Iterator<Item = GraphNodeId> + '_ {
        self.edges.range((id, GraphNodeId(0))..=(id, GraphNodeId(u32::MAX))).map(|(&(_, to), _)| to)
    }

    pub fn incoming(&self, id: GraphNodeId) -> impl Iterator<Item = GraphNodeId> + '_ {
        self.edges.keys().filter(move |(_, to)| *to == id).map(|&(from, _)| from)
    }

    pub(crate) fn insert_node(&mut self, id: GraphNodeId, kind: GraphNodeKind) {
        self.nodes.insert(id, GraphNode { id, kind });
    }

    pub(crate) fn insert_edge(&mut self, from: GraphNodeId, to: GraphNodeId, condition: Option<Condition>) {
        self.edges.insert((from, to), condition);
    }

    /// Applies one primitive in place. On error the graph is unchanged.
    pub fn apply(&mut self, primitive: &Primitive) -> Result<(), PrimitiveError> {
        match primitive {
            Primitive::AddNode { node } => {
                if self.nodes.contains_key(&node.id) {
                    return Err(PrimitiveError::DuplicateId(node.id));
                }
                self.nodes.insert(node.id, node.clone());
            }
            Primitive::DeleteNode { id } => {
                if self.nodes.remove(id).is_none() {
                    return Err(PrimitiveError::UnknownNode(*id));
                }
                self.edges.retain(|&(from, to), _| from != *id && to != *id);
            }
            Primitive::AddEdge { edge } => {
                for end in [edge.from, edge.to] {
                    if !self.nodes.contains_key(&end) {
                        return Err(PrimitiveError::UnknownNode(end));
                    }
                }
                if self.edges.contains_key(&(edge.from, edge.to)) {
                    return Err(PrimitiveError::DuplicateEdge(edge.from, edge.to));
                }
                self.edges.insert((edge.from, edge.to), edge.condition.clone());
            }
            Primitive::DeleteEdge { from, to } => {
                if self.edges.remove(&(*from, *to)).is_none() {
                    return Err(PrimitiveError::UnknownEdge(*from, *to));
                }
            }
            Primitive::UpdateEdgeCondition { from, to, condition } => match self.edges.get_mut(&(*from, *to)) {
                Some(slot) => *slot = condition.clone(),
                None => return Err(PrimitiveError::UnknownEdge(*from, *to)),
            },
        }
        Ok(())
    }
}

/// Returns the edited graph; primitives give no soundness guarantee.
pub fn apply_primitive(graph: &FlatGraph, primitive: &Primitive) -> Result<FlatGraph, PrimitiveError> {
    let mut edited = graph.clone();
    edited.apply(primitive)?;
    Ok(edited)
}

/// Primitive edit script turning `from` into `to`: edge deletions, node
/// deletions, node additions, edge additions, then condition updates. Every
/// primitive changes something that no later primitive reverts.
pub fn diff(from: &FlatGraph, to: &FlatGraph) -> Vec<Primitive> {
    let removed: BTreeSet<GraphNodeId> =
        from.nodes.iter().filter(|(id, node)| to.nodes.get(id) != Some(node)).map(|(&id, _)| id).collect();
    let survives = |&(a, b): &(GraphNodeId, GraphNodeId)| {
        from.edges.contains_key(&(a, b)) && !removed.contains(&a) && !removed.contains(&b)
    };
    let mut script = Vec::new();
    for &(a, b) in from.edges.keys() {
        if !removed.contains(&a) && !removed.contains(&b) && !to.edges.contains_key(&(a, b)) {
            script.push(Primitive::DeleteEdge { from: a, to: b });
        }
    }
    script.extend(removed.iter().map(|&id| Primitive::DeleteNode { id }));
    for (id, node) in &to.nodes {
        if from.nodes.get(id) != Some(node) {
            script.push(Primitive::AddNode { node: node.clone() });
        }
    }
    let mut updates = Vec::new();
    for (&(a, b), condition) in &to.edges {
        if !survives(&(a, b)) {
            script.push(Primitive::AddEdge { edge: Edge { from: a, to: b, condition: condition.clone() } });
        } else if from.edges[&(a, b)] != *condition {
            updates.push(Primitive::UpdateEdgeCondition { from: a, to: b, condition: condition.clone() });
        }
    }
    script.extend(updates);
    script
}
