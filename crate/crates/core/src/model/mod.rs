//! Block-structured process models.
//!
//! A [`ProcessModel`] is a tree whose interior nodes are sequences, parallel
//! blocks, conditionals and loops. Every model that can be constructed through
//! this module satisfies the structural invariants, so soundness of the
//! derived flow graph holds by construction rather than by checking.

mod canonical;
mod document;
mod notation;
mod tree;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use canonical::{canonical_key, canonical_order, canonicalize, CanonicalForm, Digest};
pub(crate) use canonical::digest_of;
pub use document::{deserialize, from_json_value, serialize, to_json_value, MODEL_FORMAT};
pub use tree::{BlockNode, Condition, Label, NodeId, NodeKind, Walk};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invariant violation: {}", describe(.0))]
    InvariantViolation(Vec<Violation>),
}

fn describe(violations: &[Violation]) -> String {
    match violations {
        [] => "none".to_string(),
        [only] => only.to_string(),
        [first, rest @ ..] => format!("{first} (and {} more)", rest.len()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DuplicateId,
    ActivityWithChildren,
    SkipOutsideConditional,
    EmptySequence,
    ParallelArity,
    ConditionalArity,
    ConditionalWithoutActivity,
    MultipleSkipBranches,
    LoopArity,
    MissingCondition,
    UnexpectedCondition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(node) => write!(f, "{:?} at {}: {}", self.code, node, self.message),
            None => write!(f, "{:?}: {}", self.code, self.message),
        }
    }
}

/// A block-structured process model.
///
/// The root is always a sequence (possibly empty). Nested sequences are
/// flattened and sequences, parallel blocks and conditionals never have a
/// single child. Node ids are unique and never reused: `next_id` only grows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessModel {
    root: BlockNode,
    next_id: u32,
}

impl Default for ProcessModel {
    fn default() -> Self {
        ProcessModel::new_empty()
    }
}

impl ProcessModel {
    /// The empty model: a root sequence without children.
    pub fn new_empty() -> ProcessModel {
        ProcessModel { root: BlockNode::new(NodeId(0), NodeKind::Sequence, Vec::new()), next_id: 1 }
    }

    /// Validates `root` and brings it into normal form, keeping its node ids.
    pub fn from_tree(root: BlockNode) -> Result<ProcessModel, ModelError> {
        let violations = validate_tree(&root);
        if !violations.is_empty() {
            return Err(ModelError::InvariantViolation(violations));
        }
        let mut next_id = root.max_id().0 + 1;
        let root = normalize_root(root, &mut next_id);
        Ok(ProcessModel { root, next_id })
    }

    /// Like [`from_tree`](Self::from_tree) but assigns fresh pre-order ids
    /// first, so templates may reuse placeholder ids.
    pub fn from_template(mut root: BlockNode) -> Result<ProcessModel, ModelError> {
        let mut counter = 0;
        renumber(&mut root, &mut counter);
        ProcessModel::from_tree(root)
    }

    pub(crate) fn from_parts_unchecked(root: BlockNode, next_id: u32) -> ProcessModel {
        ProcessModel { root, next_id }
    }

    pub fn root(&self) -> &BlockNode {
        &self.root
    }

    pub(crate) fn root_mut(&mut self) -> &mut BlockNode {
        &mut self.root
    }

    /// Id the next created node will receive.
    pub fn next_id(&self) -> NodeId {
        NodeId(self.next_id)
    }

    /// Replaces activity labels for which `label_of` returns a new one.
    pub(crate) fn relabel(&mut self, label_of: &impl Fn(NodeId) -> Option<Label>) {
        fn visit(node: &mut BlockNode, label_of: &impl Fn(NodeId) -> Option<Label>) {
            if let NodeKind::Activity(label) = &mut node.kind {
                if let Some(new) = label_of(node.id) {
                    *label = new;
                }
            }
            for child in &mut node.children {
                visit(child, label_of);
            }
        }
        visit(&mut self.root, label_of);
    }

    /// Raises `next_id` to at least `next`, so ids handed out earlier are not
    /// reused after restoring an older snapshot.
    /// Copy with every guard reset to UNSET.
    pub(crate) fn without_conditions(&self) -> ProcessModel {
        fn visit(node: &mut BlockNode) {
            if node.condition.is_some() {
                node.condition = Some(Condition::Unset);
            }
            node.children.iter_mut().for_each(visit);
        }
        let mut model = self.clone();
        visit(&mut model.root);
        model
    }

    pub(crate) fn reserve_ids(&mut self, next: NodeId) {
        self.next_id = self.next_id.max(next.0);
    }

    pub(crate) fn alloc_id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn node(&self, id: NodeId) -> Option<&BlockNode> {
        self.root.find(id)
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Option<&mut BlockNode> {
        let path = self.root.path_to(id)?;
        Some(self.root.at_path_mut(&path))
    }

    /// Parent of the node with `id`, or `None` for the root and unknown ids.
    pub fn parent(&self, id: NodeId) -> Option<&BlockNode> {
        let path = self.root.path_to(id)?;
        let (_, parent) = path.split_last()?;
        Some(self.root.at_path(parent))
    }

    pub fn is_empty(&self) -> bool {
        self.root.children.is_empty()
    }

    /// Activity labels as a sorted multiset.
    pub fn activities(&self) -> Vec<Label> {
        let mut labels = self.root.labels();
        labels.sort();
        labels
    }

    pub fn activity_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for label in self.root.labels() {
            *counts.entry(label).or_insert(0) += 1;
        }
        counts
    }

    pub fn activity_count(&self) -> usize {
        self.root.walk().filter(|node| node.label().is_some()).count()
    }

    /// Distinct condition expressions used anywhere in the model.
    pub fn condition_vocabulary(&self) -> Vec<Condition> {
        let mut conditions: Vec<Condition> = self
            .root
            .walk()
            .filter_map(|node| node.condition.clone())
            .filter(|condition| !condition.is_unset())
            .collect();
        conditions.sort();
        conditions.dedup();
        conditions
    }

    /// Re-establishes normal form after an in-place edit.
    pub(crate) fn normalize(&mut self) {
        let root = std::mem::replace(&mut self.root, BlockNode::skip(NodeId(0)));
        self.root = normalize_root(root, &mut self.next_id);
    }

    /// All invariant violations of this model; empty for every model built
    /// through the public API.
    pub fn violations(&self) -> Vec<Violation> {
        let mut violations = validate_tree(&self.root);
        if !self.root.is_sequence() {
            violations.push(Violation {
                code: ViolationCode::EmptySequence,
                node: Some(self.root.id),
                message: "root must be a sequence".into(),
            });
        }
        check_normal_form(&self.root, true, &mut violations);
        if self.root.max_id().0 >= self.next_id {
            violations.push(Violation {
                code: ViolationCode::DuplicateId,
                node: Some(self.root.max_id()),
                message: "node id not below the id counter".into(),
            });
        }
        violations
    }
}

impl std::str::FromStr for ProcessModel {
    type Err = ModelError;

    /// Parses the compact notation, e.g. `SEQ(A, XOR([x > 5] B, _))`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        notation::parse(text)
    }
}

impl fmt::Display for ProcessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        notation::write_node(f, &self.root)
    }
}

fn renumber(node: &mut BlockNode, counter: &mut u32) {
    node.id = NodeId(*counter);
    *counter += 1;
    for child in &mut node.children {
        renumber(child, counter);
    }
}

/// Structural invariants that hold for any accepted input tree (before
/// normalization).
pub(crate) fn validate_tree(root: &BlockNode) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    validate_node(root, None, &mut seen, &mut violations);
    violations
}

fn validate_node(
    node: &BlockNode,
    parent: Option<&NodeKind>,
    seen: &mut HashSet<NodeId>,
    out: &mut Vec<Violation>,
) {
    let mut push = |code, message: String| out.push(Violation { code, node: Some(node.id), message });
    if !seen.insert(node.id) {
        push(ViolationCode::DuplicateId, format!("id {} used more than once", node.id.0));
    }
    let guarded = parent.is_some_and(NodeKind::guards_children);
    match (&node.condition, guarded) {
        (None, true) => push(ViolationCode::MissingCondition, "branch without a condition slot".into()),
        (Some(_), false) => push(ViolationCode::UnexpectedCondition, "condition outside a conditional or loop".into()),
        _ => {}
    }
    let arity = node.children.len();
    match &node.kind {
        NodeKind::Activity(_) if arity > 0 => {
            push(ViolationCode::ActivityWithChildren, "activities are leaves".into())
        }
        NodeKind::Skip if arity > 0 => push(ViolationCode::ActivityWithChildren, "skip is a leaf".into()),
        NodeKind::Skip if parent != Some(&NodeKind::Conditional) => {
            push(ViolationCode::SkipOutsideConditional, "skip only marks an empty conditional branch".into())
        }
        NodeKind::Sequence if arity == 0 && parent.is_some() => {
            push(ViolationCode::EmptySequence, "nested sequence without children".into())
        }
        NodeKind::Parallel if arity < 2 => {
            push(ViolationCode::ParallelArity, format!("parallel block with {arity} branch(es)"))
        }
        NodeKind::Conditional if arity < 2 => {
            push(ViolationCode::ConditionalArity, format!("conditional with {arity} branch(es)"))
        }
        NodeKind::Conditional => {
            let skips = node.children.iter().filter(|child| child.is_skip()).count();
            if skips == arity {
                push(ViolationCode::ConditionalWithoutActivity, "every branch is empty".into());
            } else if skips > 1 {
                push(ViolationCode::MultipleSkipBranches, format!("{skips} empty branches"));
            }
        }
        NodeKind::Loop if arity != 1 => push(ViolationCode::LoopArity, format!("loop with {arity} bodies")),
        NodeKind::Loop if node.children[0].is_skip() => {
            push(ViolationCode::SkipOutsideConditional, "loop body must not be empty".into())
        }
        _ => {}
    }
    for child in &node.children {
        validate_node(child, Some(&node.kind), seen, out);
    }
}

fn check_normal_form(node: &BlockNode, is_root: bool, out: &mut Vec<Violation>) {
    for child in &node.children {
        if node.is_sequence() && child.is_sequence() {
            out.push(Violation {
                code: ViolationCode::EmptySequence,
                node: Some(child.id),
                message: "sequence directly inside a sequence".into(),
            });
        }
        check_normal_form(child, false, out);
    }
    if !is_root && node.is_sequence() && node.children.len() < 2 {
        out.push(Violation {
            code: ViolationCode::EmptySequence,
            node: Some(node.id),
            message: "nested sequence with fewer than two children".into(),
        });
    }
}

fn normalize_root(root: BlockNode, next_id: &mut u32) -> BlockNode {
    if root.is_sequence() {
        let children = normalize_sequence_children(root.children);
        return BlockNode::new(root.id, NodeKind::Sequence, children);
    }
    match normalize_node(root) {
        None => {
            let id = NodeId(*next_id);
            *next_id += 1;
            BlockNode::new(id, NodeKind::Sequence, Vec::new())
        }
        Some(mut node) if node.is_sequence() => {
            node.condition = None;
            node
        }
        Some(node) => {
            let id = NodeId(*next_id);
            *next_id += 1;
            BlockNode::new(id, NodeKind::Sequence, vec![node])
        }
    }
}

fn normalize_sequence_children(children: Vec<BlockNode>) -> Vec<BlockNode> {
    let mut flat = Vec::with_capacity(children.len());
    for child in children {
        match normalize_node(child) {
            Some(node) if node.is_sequence() => flat.extend(node.children.into_iter().map(|mut grandchild| {
                grandchild.condition = None;
                grandchild
            })),
            Some(node) if node.is_skip() => {}
            Some(node) => flat.push(node),
            None => {}
        }
    }
    flat
}

/// Normalizes a subtree; `None` means the subtree became empty.
fn normalize_node(node: BlockNode) -> Option<BlockNode> {
    let BlockNode { id, kind, children, condition } = node;
    match kind {
        NodeKind::Activity(_) | NodeKind::Skip => Some(BlockNode { id, kind, children, condition }),
        NodeKind::Sequence => {
            let children = normalize_sequence_children(children);
            collapse(id, kind, children, condition)
        }
        NodeKind::Parallel => {
            let children: Vec<_> = children.into_iter().filter_map(normalize_node).collect();
            collapse(id, kind, children, condition)
        }
        NodeKind::Conditional => {
            let mut seen_skip = false;
            let mut branches = Vec::with_capacity(children.len());
            for child in children {
                let branch_id = child.id;
                let guard = child.condition.clone();
                let branch = match normalize_node(child) {
                    Some(branch) if !branch.is_skip() => branch,
                    _ => BlockNode { id: branch_id, kind: NodeKind::Skip, children: Vec::new(), condition: guard },
                };
                if branch.is_skip() {
                    if seen_skip {
                        continue;
                    }
                    seen_skip = true;
                }
                branches.push(branch);
            }
            if branches.iter().all(BlockNode::is_skip) {
                return None;
            }
            collapse(id, kind, branches, condition)
        }
        NodeKind::Loop => {
            let body = children.into_iter().next().and_then(normalize_node).filter(|body| !body.is_skip())?;
            Some(BlockNode { id, kind, children: vec![body], condition })
        }
    }
}

/// Drops empty blocks and lifts the only child of a one-child block into the
/// block's place, handing over the block's guard.
fn collapse(
    id: NodeId,
    kind: NodeKind,
    mut children: Vec<BlockNode>,
    condition: Option<Condition>,
) -> Option<BlockNode> {
    match children.len() {
        0 => None,
        1 => {
            let mut only = children.pop().expect("one child");
            only.condition = condition;
            (!only.is_skip()).then_some(only)
        }
        _ => Some(BlockNode { id, kind, children, condition }),
    }
}
