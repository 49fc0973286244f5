//! Soundness checking by structural reduction.
//!
//! Activities are folded into the edges around them, and a split/join pair
//! whose branches are all plain edges collapses into a single block node. A
//! graph is block-structured iff this ends with a single `start -> end` edge;
//! the content collected along the way is the block tree.

use serde::Serialize;
use thiserror::Error;

use crate::model::{BlockNode, Condition, NodeId, NodeKind, ProcessModel};

use super::{FlatGraph, GraphNodeId, GraphNodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SoundnessCode {
    MissingStart,
    MultipleStart,
    MissingEnd,
    MultipleEnd,
    UnreachableNode,
    DanglingNode,
    BadDegree,
    MismatchedBlock,
    NotBlockStructured,
    EmptyParallelBranch,
    EmptyLoopBody,
    MissingCondition,
    /// Warning only.
    UnsetCondition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: SoundnessCode,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<GraphNodeId>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(GraphNodeId, GraphNodeId)>,
    pub message: String,
}

impl Finding {
    fn nodes(code: SoundnessCode, nodes: Vec<GraphNodeId>, message: impl Into<String>) -> Finding {
        Finding { code, nodes, edges: Vec::new(), message: message.into() }
    }

    fn edge(code: SoundnessCode, edge: (GraphNodeId, GraphNodeId), message: impl Into<String>) -> Finding {
        Finding { code, nodes: Vec::new(), edges: vec![edge], message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub sound: bool,
    pub violations: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is not block-structured ({} violation(s))", .0.violations.len())]
    NotBlockStructured(SoundnessReport),
}

pub fn check_soundness(graph: &FlatGraph) -> SoundnessReport {
    analyze(graph).0
}

/// Rebuilds the block model a sound graph is the lowering of.
pub fn from_graph(graph: &FlatGraph) -> Result<ProcessModel, GraphError> {
    let (report, root) = analyze(graph);
    match root {
        Some(root) if report.sound => ProcessModel::from_template(root).map_err(|_| GraphError::NotBlockStructured(report)),
        _ => Err(GraphError::NotBlockStructured(report)),
    }
}

fn analyze(graph: &FlatGraph) -> (SoundnessReport, Option<BlockNode>) {
    let mut violations = basic_checks(graph);
    let mut warnings = Vec::new();
    let mut root = None;
    if violations.is_empty() {
        let mut reducer = Reducer::new(graph);
        root = reducer.run();
        violations = reducer.violations;
        warnings = reducer.warnings;
    }
    let sound = violations.is_empty();
    (SoundnessReport { sound, violations, warnings }, root.filter(|_| sound))
}

fn basic_checks(graph: &FlatGraph) -> Vec<Finding> {
    use SoundnessCode::*;
    let mut out = Vec::new();
    let of_kind = |want: &GraphNodeKind| graph.nodes().filter(|n| &n.kind == want).map(|n| n.id).collect::<Vec<_>>();
    let starts = of_kind(&GraphNodeKind::Start);
    let ends = of_kind(&GraphNodeKind::End);
    match starts.len() {
        0 => out.push(Finding::nodes(MissingStart, vec![], "no start event")),
        1 => {}
        _ => out.push(Finding::nodes(MultipleStart, starts.clone(), "more than one start event")),
    }
    match ends.len() {
        0 => out.push(Finding::nodes(MissingEnd, vec![], "no end event")),
        1 => {}
        _ => out.push(Finding::nodes(MultipleEnd, ends.clone(), "more than one end event")),
    }

    let ids: Vec<GraphNodeId> = graph.nodes().map(|node| node.id).collect();
    let index = |id: GraphNodeId| ids.binary_search(&id).expect("edge ends are nodes");
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut ins: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for edge in graph.edges() {
        let (from, to) = (index(edge.from), index(edge.to));
        outs[from].push(to);
        ins[to].push(from);
    }

    let forward = starts.first().map(|&s| reachable(index(s), &outs)).unwrap_or_default();
    let backward = ends.first().map(|&e| reachable(index(e), &ins)).unwrap_or_default();
    for (at, node) in graph.nodes().enumerate() {
        if starts.len() == 1 && !forward[at] {
            out.push(Finding::nodes(UnreachableNode, vec![node.id], "not reachable from the start event"));
        } else if ends.len() == 1 && !backward[at] {
            out.push(Finding::nodes(DanglingNode, vec![node.id], "no path to the end event"));
        }
    }

    for (at, node) in graph.nodes().enumerate() {
        let (i, o) = (ins[at].len(), outs[at].len());
        let ok = match node.kind {
            GraphNodeKind::Start => i == 0 && o == 1,
            GraphNodeKind::End => i == 1 && o == 0,
            GraphNodeKind::Activity { .. } => i == 1 && o == 1,
            GraphNodeKind::AndSplit | GraphNodeKind::XorSplit => i == 1 && o >= 2,
            GraphNodeKind::AndJoin | GraphNodeKind::XorJoin => i >= 2 && o == 1,
        };
        if !ok {
            out.push(Finding::nodes(BadDegree, vec![node.id], format!("{i} incoming and {o} outgoing edges")));
        }
    }
    out
}

fn reachable(from: usize, adjacency: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(at) = stack.pop() {
        for &next in &adjacency[at] {
            if !seen[next] {
                seen[next] = true;
                stack.push(next);
            }
        }
    }
    seen
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Gate {
    And,
    Xor,
}

#[derive(Debug)]
enum Slot {
    Start,
    End,
    Split(Gate),
    Join(Gate),
    Item(BlockNode),
}

#[derive(Debug)]
struct RNode {
    slot: Slot,
    origin: GraphNodeId,
    ins: Vec<usize>,
    outs: Vec<usize>,
}

#[derive(Debug)]
struct REdge {
    from: usize,
    to: usize,
    condition: Option<Condition>,
    content: Vec<BlockNode>,
    origin: (GraphNodeId, GraphNodeId),
}

/// Dense storage with stable indices.
struct Slab<T> {
    items: Vec<Option<T>>,
    live: usize,
}

impl<T> Slab<T> {
    fn with_capacity(capacity: usize) -> Slab<T> {
        Slab { items: Vec::with_capacity(capacity), live: 0 }
    }

    fn push(&mut self, item: T) -> usize {
        self.items.push(Some(item));
        self.live += 1;
        self.items.len() - 1
    }

    fn remove(&mut self, index: usize) -> Option<T> {
        let item = self.items.get_mut(index)?.take();
        if item.is_some() {
            self.live -= 1;
        }
        item
    }

    fn get_mut(&mut self, index: usize) -> Option<&mut T> {
        self.items.get_mut(index)?.as_mut()
    }

    fn contains(&self, index: usize) -> bool {
        matches!(self.items.get(index), Some(Some(_)))
    }

    fn len(&self) -> usize {
        self.live
    }

    fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.items.iter().enumerate().filter_map(|(index, item)| item.as_ref().map(|item| (index, item)))
    }
}

impl<T> std::ops::Index<usize> for Slab<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        self.items[index].as_ref().expect("live slot")
    }
}

struct Reducer {
    nodes: Slab<RNode>,
    edges: Slab<REdge>,
    violations: Vec<Finding>,
    warnings: Vec<Finding>,
}

enum Step {
    Progress,
    Nothing,
    Fatal,
}

fn placeholder(kind: NodeKind, children: Vec<BlockNode>) -> BlockNode {
    BlockNode::new(NodeId(0), kind, children)
}

fn as_branch(mut content: Vec<BlockNode>) -> BlockNode {
    if content.len() == 1 {
        content.pop().expect("one element")
    } else {
        placeholder(NodeKind::Sequence, content)
    }
}

impl Reducer {
    fn new(graph: &FlatGraph) -> Reducer {
        let mut nodes = Slab::with_capacity(graph.node_count() * 2);
        let ids: Vec<GraphNodeId> = graph.nodes().map(|node| node.id).collect();
        for node in graph.nodes() {
            let slot = match &node.kind {
                GraphNodeKind::Start => Slot::Start,
                GraphNodeKind::End => Slot::End,
                GraphNodeKind::Activity { label } => Slot::Item(BlockNode::activity(NodeId(0), label.clone())),
                GraphNodeKind::AndSplit => Slot::Split(Gate::And),
                GraphNodeKind::AndJoin => Slot::Join(Gate::And),
                GraphNodeKind::XorSplit => Slot::Split(Gate::Xor),
                GraphNodeKind::XorJoin => Slot::Join(Gate::Xor),
            };
            nodes.push(RNode { slot, origin: node.id, ins: Vec::new(), outs: Vec::new() });
        }
        let mut reducer = Reducer {
            nodes,
            edges: Slab::with_capacity(graph.edge_count() * 2),
            violations: Vec::new(),
            warnings: Vec::new(),
        };
        let index = |id: GraphNodeId| ids.binary_search(&id).expect("edge ends are nodes");
        for edge in graph.edges() {
            reducer.add_edge(REdge {
                from: index(edge.from),
                to: index(edge.to),
                condition: edge.condition,
                content: Vec::new(),
                origin: (edge.from, edge.to),
            });
        }
        reducer
    }

    fn add_edge(&mut self, edge: REdge) -> usize {
        let (from, to) = (edge.from, edge.to);
        let id = self.edges.push(edge);
        self.nodes.get_mut(from).expect("edge source").outs.push(id);
        self.nodes.get_mut(to).expect("edge target").ins.push(id);
        id
    }

    fn remove_edge(&mut self, id: usize) -> REdge {
        let edge = self.edges.remove(id).expect("live edge");
        if let Some(node) = self.nodes.get_mut(edge.from) {
            node.outs.retain(|&e| e != id);
        }
        if let Some(node) = self.nodes.get_mut(edge.to) {
            node.ins.retain(|&e| e != id);
        }
        edge
    }

    fn retarget(&mut self, edge: usize, to: usize) {
        let old = std::mem::replace(&mut self.edges.get_mut(edge).expect("live edge").to, to);
        if let Some(node) = self.nodes.get_mut(old) {
            node.ins.retain(|&e| e != edge);
        }
        self.nodes.get_mut(to).expect("new target").ins.push(edge);
    }

    fn resource(&mut self, edge: usize, from: usize) {
        let old = std::mem::replace(&mut self.edges.get_mut(edge).expect("live edge").from, from);
        if let Some(node) = self.nodes.get_mut(old) {
            node.outs.retain(|&e| e != edge);
        }
        self.nodes.get_mut(from).expect("new source").outs.push(edge);
    }

    fn new_item(&mut self, block: BlockNode, origin: GraphNodeId) -> usize {
        self.nodes.push(RNode { slot: Slot::Item(block), origin, ins: Vec::new(), outs: Vec::new() })
    }

    fn run(&mut self) -> Option<BlockNode> {
        loop {
            let mut progressed = false;
            // Items created during a pass are visited in the same pass.
            let mut id = 0;
            while id < self.nodes.items.len() {
                id += 1;
                let id = id - 1;
                if !self.nodes.contains(id) {
                    continue;
                }
                match self.step(id) {
                    Step::Progress => progressed = true,
                    Step::Nothing => {}
                    Step::Fatal => return None,
                }
            }
            if !progressed {
                break;
            }
        }
        if self.nodes.len() == 2 && self.edges.len() == 1 {
            let (_, edge) = self.edges.iter().next().expect("one edge");
            if matches!(self.nodes[edge.from].slot, Slot::Start) && matches!(self.nodes[edge.to].slot, Slot::End) {
                let content = edge.content.clone();
                return Some(placeholder(NodeKind::Sequence, content));
            }
        }
        self.diagnose_stall();
        None
    }

    fn step(&mut self, id: usize) -> Step {
        let node = &self.nodes[id];
        match node.slot {
            Slot::Item(_) if node.ins.len() == 1 && node.outs.len() == 1 && node.ins[0] != node.outs[0] => {
                self.serial(id);
                Step::Progress
            }
            Slot::Split(gate) => self.block(id, gate),
            Slot::Join(Gate::Xor) => self.loop_block(id),
            _ => Step::Nothing,
        }
    }

    fn serial(&mut self, id: usize) {
        let node = self.nodes.remove(id).expect("live node");
        let Slot::Item(item) = node.slot else { unreachable!("only items fold into edges") };
        let first = self.remove_edge(node.ins[0]);
        let second = self.remove_edge(node.outs[0]);
        let mut content = first.content;
        content.push(item);
        content.extend(second.content);
        self.add_edge(REdge { from: first.from, to: second.to, condition: first.condition, content, origin: first.origin });
    }

    /// The join all outgoing edges of `split` lead to, if its incoming edges
    /// are exactly those.
    fn matching_join(&self, split: usize) -> Option<usize> {
        let node = &self.nodes[split];
        if node.ins.len() != 1 || node.outs.len() < 2 {
            return None;
        }
        let join = self.edges[node.outs[0]].to;
        if join == split || node.outs.iter().any(|e| self.edges[*e].to != join) {
            return None;
        }
        let target = &self.nodes[join];
        (target.ins.len() == node.outs.len() && target.outs.len() == 1 && matches!(target.slot, Slot::Join(_)))
            .then_some(join)
    }

    fn block(&mut self, split: usize, gate: Gate) -> Step {
        let Some(join) = self.matching_join(split) else { return Step::Nothing };
        if !matches!(self.nodes[join].slot, Slot::Join(g) if g == gate) {
            return Step::Nothing;
        }
        let branch_edges = self.nodes[split].outs.clone();
        let mut branches = Vec::with_capacity(branch_edges.len());
        for e in branch_edges {
            let edge = self.remove_edge(e);
            let branch = match gate {
                Gate::And => {
                    if edge.content.is_empty() {
                        self.violations.push(Finding::edge(
                            SoundnessCode::EmptyParallelBranch,
                            edge.origin,
                            "parallel branch without activities",
                        ));
                        return Step::Fatal;
                    }
                    as_branch(edge.content)
                }
                Gate::Xor => {
                    let Some(condition) = edge.condition else {
                        self.violations.push(Finding::edge(
                            SoundnessCode::MissingCondition,
                            edge.origin,
                            "conditional branch without a condition slot",
                        ));
                        return Step::Fatal;
                    };
                    if condition.is_unset() {
                        self.warnings.push(Finding::edge(
                            SoundnessCode::UnsetCondition,
                            edge.origin,
                            "branch condition not set yet",
                        ));
                    }
                    let body =
                        if edge.content.is_empty() { BlockNode::skip(NodeId(0)) } else { as_branch(edge.content) };
                    body.with_condition(condition)
                }
            };
            branches.push(branch);
        }
        let kind = if gate == Gate::And { NodeKind::Parallel } else { NodeKind::Conditional };
        let origin = self.nodes[split].origin;
        let entry = self.nodes[split].ins[0];
        let exit = self.nodes[join].outs[0];
        let item = self.new_item(placeholder(kind, branches), origin);
        self.retarget(entry, item);
        self.resource(exit, item);
        self.nodes.remove(split);
        self.nodes.remove(join);
        Step::Progress
    }

    /// `in -> join -> [body] -> split -> out` with an empty back edge
    /// `split -> join`.
    fn loop_block(&mut self, join: usize) -> Step {
        let node = &self.nodes[join];
        if node.ins.len() != 2 || node.outs.len() != 1 {
            return Step::Nothing;
        }
        let forward = node.outs[0];
        let split = self.edges[forward].to;
        let split_node = &self.nodes[split];
        if split == join || !matches!(split_node.slot, Slot::Split(Gate::Xor)) || split_node.ins.len() != 1 {
            return Step::Nothing;
        }
        if split_node.outs.len() != 2 {
            return Step::Nothing;
        }
        let Some(&back) = split_node.outs.iter().find(|e| self.edges[**e].to == join) else { return Step::Nothing };
        let exit = *split_node.outs.iter().find(|&&e| e != back).expect("two outgoing edges");
        let entry = *node.ins.iter().find(|&&e| e != back).expect("two incoming edges");
        if self.edges[exit].to == join || self.edges[entry].from == split {
            return Step::Nothing;
        }
        if !self.edges[back].content.is_empty() {
            return Step::Nothing;
        }
        let body = &self.edges[forward];
        if body.content.is_empty() {
            self.violations.push(Finding::nodes(
                SoundnessCode::EmptyLoopBody,
                vec![self.nodes[join].origin, self.nodes[split].origin],
                "loop without a body",
            ));
            return Step::Fatal;
        }
        let back_edge = &self.edges[back];
        let Some(condition) = back_edge.condition.clone() else {
            self.violations.push(Finding::edge(
                SoundnessCode::MissingCondition,
                back_edge.origin,
                "loop back edge without a condition slot",
            ));
            return Step::Fatal;
        };
        if condition.is_unset() {
            self.warnings.push(Finding::edge(SoundnessCode::UnsetCondition, back_edge.origin, "loop condition not set yet"));
        }
        let body = as_branch(self.remove_edge(forward).content).with_condition(condition);
        self.remove_edge(back);
        let origin = self.nodes[join].origin;
        let item = self.new_item(placeholder(NodeKind::Loop, vec![body]), origin);
        self.retarget(entry, item);
        self.resource(exit, item);
        self.edges.get_mut(exit).expect("exit edge").condition = None;
        self.nodes.remove(join);
        self.nodes.remove(split);
        Step::Progress
    }

    fn diagnose_stall(&mut self) {
        let mut mismatched = Vec::new();
        for (id, node) in self.nodes.iter() {
            if let Slot::Split(gate) = node.slot {
                if let Some(join) = self.matching_join(id) {
                    let join_node = &self.nodes[join];
                    if !matches!(join_node.slot, Slot::Join(g) if g == gate) {
                        mismatched.push(Finding::nodes(
                            SoundnessCode::MismatchedBlock,
                            vec![node.origin, join_node.origin],
                            "split and join of different gateway types",
                        ));
                    }
                }
            }
        }
        if mismatched.is_empty() {
            let stuck: Vec<GraphNodeId> = self
                .nodes
                .iter()
                .map(|(_, node)| node)
                .filter(|node| matches!(node.slot, Slot::Split(_) | Slot::Join(_)))
                .map(|node| node.origin)
                .collect();
            self.violations.push(Finding::nodes(
                SoundnessCode::NotBlockStructured,
                stuck,
                "gateways are not properly matched and nested",
            ));
        } else {
            self.violations.extend(mismatched);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{to_graph, Edge, GraphNode, Primitive};
    use crate::model::{canonicalize, Label};

    fn build(nodes: &[(u32, GraphNodeKind)], edges: &[(u32, u32)]) -> FlatGraph {
        let mut graph = FlatGraph::default();
        for (id, kind) in nodes {
            graph.apply(&Primitive::AddNode { node: GraphNode { id: GraphNodeId(*id), kind: kind.clone() } }).unwrap();
        }
        for &(from, to) in edges {
            let condition = match graph.node(GraphNodeId(from)).unwrap().kind {
                GraphNodeKind::XorSplit => Some(Condition::Unset),
                _ => None,
            };
            graph
                .apply(&Primitive::AddEdge { edge: Edge { from: GraphNodeId(from), to: GraphNodeId(to), condition } })
                .unwrap();
        }
        graph
    }

    fn act(label: &str) -> GraphNodeKind {
        GraphNodeKind::Activity { label: Label::new(label).unwrap() }
    }

    fn codes(report: &SoundnessReport) -> Vec<SoundnessCode> {
        report.violations.iter().map(|v| v.code).collect()
    }

    #[test]
    fn lowered_models_are_sound_and_round_trip() {
        for text in [
            "SEQ()",
            "SEQ(A, B)",
            "SEQ(XOR([x] A, _))",
            "SEQ(AND(A, SEQ(B, C)), LOOP([again] XOR([p] D, [q] AND(E, F))))",
            "SEQ(LOOP(LOOP(A)), XOR(LOOP(B), _))",
        ] {
            let model: ProcessModel = text.parse().unwrap();
            let graph = to_graph(&model);
            let report = check_soundness(&graph);
            assert!(report.sound, "{text}: {report:?}");
            let back = from_graph(&graph).unwrap();
            assert_eq!(canonicalize(&back).digest, canonicalize(&model).digest, "{text} -> {back}");
        }
    }

    #[test]
    fn unset_conditions_are_warnings() {
        let report = check_soundness(&to_graph(&"SEQ(XOR(A, _), LOOP(B))".parse().unwrap()));
        assert!(report.sound);
        assert_eq!(report.warnings.len(), 3);
        assert!(report.warnings.iter().all(|w| w.code == SoundnessCode::UnsetCondition));
    }

    #[test]
    fn activity_without_outgoing_edge_is_dangling() {
        let graph = build(&[(0, GraphNodeKind::Start), (1, GraphNodeKind::End), (2, act("A")), (3, act("B"))], &[
            (0, 2),
            (2, 1),
            (0, 3),
        ]);
        let report = check_soundness(&graph);
        assert!(!report.sound);
        assert!(codes(&report).contains(&SoundnessCode::DanglingNode));
    }

    #[test]
    fn xor_split_with_and_join_is_mismatched() {
        let graph = build(
            &[
                (0, GraphNodeKind::Start),
                (1, GraphNodeKind::End),
                (2, GraphNodeKind::XorSplit),
                (3, act("A")),
                (4, act("B")),
                (5, GraphNodeKind::AndJoin),
            ],
            &[(0, 2), (2, 3), (2, 4), (3, 5), (4, 5), (5, 1)],
        );
        let report = check_soundness(&graph);
        assert_eq!(codes(&report), vec![SoundnessCode::MismatchedBlock]);
        assert_eq!(report.violations[0].nodes, vec![GraphNodeId(2), GraphNodeId(5)]);
    }

    #[test]
    fn missing_branch_condition_is_a_violation() {
        let mut graph = to_graph(&"SEQ(XOR([x] A, _))".parse().unwrap());
        let (split, join) = crate::graph::graph_ids(NodeId(1));
        graph.apply(&Primitive::UpdateEdgeCondition { from: split, to: join, condition: None }).unwrap();
        assert_eq!(codes(&check_soundness(&graph)), vec![SoundnessCode::MissingCondition]);
    }

    #[test]
    fn crossing_blocks_are_not_block_structured() {
        // Two xor blocks whose branches interleave.
        let graph = build(
            &[
                (0, GraphNodeKind::Start),
                (1, GraphNodeKind::End),
                (2, GraphNodeKind::XorSplit),
                (3, GraphNodeKind::XorSplit),
                (4, GraphNodeKind::XorJoin),
                (5, GraphNodeKind::XorJoin),
                (6, act("A")),
            ],
            &[(0, 2), (2, 3), (2, 4), (3, 4), (3, 6), (6, 5), (4, 5), (5, 1)],
        );
        let report = check_soundness(&graph);
        assert_eq!(codes(&report), vec![SoundnessCode::NotBlockStructured]);
        assert!(matches!(from_graph(&graph), Err(GraphError::NotBlockStructured(_))));
    }

    #[test]
    fn trivial_graph_is_the_empty_model() {
        assert!(from_graph(&FlatGraph::trivial()).unwrap().is_empty());
    }

    #[test]
    fn structural_problems_are_reported() {
        let no_events = build(&[(2, act("A"))], &[]);
        let found = codes(&check_soundness(&no_events));
        assert!(found.contains(&SoundnessCode::MissingStart));
        assert!(found.contains(&SoundnessCode::MissingEnd));

        let isolated = build(&[(0, GraphNodeKind::Start), (1, GraphNodeKind::End), (2, act("X"))], &[(0, 1)]);
        let found = codes(&check_soundness(&isolated));
        assert!(found.contains(&SoundnessCode::UnreachableNode));
        assert!(found.contains(&SoundnessCode::BadDegree));
    }
}
