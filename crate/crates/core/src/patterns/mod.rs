//! The change-pattern set: guarded, structure-preserving edits of a
//! [`ProcessModel`].
//!
//! Every successful [`apply_pattern`] returns a model that satisfies all model
//! invariants and whose graph lowering is sound. Failed applications never
//! touch the input.

mod apply;
mod builder;
mod enumerate;
mod invert;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{diff, to_graph, Primitive};
use crate::model::{Condition, Label, NodeId, ProcessModel};

pub use apply::apply_pattern;
pub(crate) use apply::apply_validated;
pub use builder::{build_steps, constructible, BuildError};
pub use enumerate::{applicable_patterns, fragments, positions};
pub use invert::invert;

pub(crate) use builder::Builder;
pub(crate) use enumerate::applicable_where;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternKind {
    SerialInsert,
    ParallelInsert,
    DeleteFragment,
    EmbedInLoop,
    EmbedInConditional,
    UpdateCondition,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::SerialInsert,
        PatternKind::ParallelInsert,
        PatternKind::DeleteFragment,
        PatternKind::EmbedInLoop,
        PatternKind::EmbedInConditional,
        PatternKind::UpdateCondition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::SerialInsert => "serial_insert",
            PatternKind::ParallelInsert => "parallel_insert",
            PatternKind::DeleteFragment => "delete_fragment",
            PatternKind::EmbedInLoop => "embed_in_loop",
            PatternKind::EmbedInConditional => "embed_in_conditional",
            PatternKind::UpdateCondition => "update_condition",
        }
    }
}

/// Where a serial insert puts the new activity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    /// Gap `index` of a sequence, `0..=len`.
    Gap { sequence: NodeId, index: usize },
    /// Directly before a node that is not inside a sequence; the two end up
    /// in a new sequence that takes over the node's branch condition.
    Before(NodeId),
    After(NodeId),
    /// Replaces an empty conditional branch.
    Skip(NodeId),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Gap { sequence, index } => write!(f, "{sequence}[{index}]"),
            Position::Before(node) => write!(f, "before {node}"),
            Position::After(node) => write!(f, "after {node}"),
            Position::Skip(node) => write!(f, "into {node}"),
        }
    }
}

/// One concrete pattern application. Node references are ids of the model
/// the instance is applied to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum PatternInstance {
    SerialInsert {
        label: Label,
        anchor: Position,
    },
    /// Puts a new activity in parallel to `target`; appends a branch when the
    /// target already sits in a parallel block.
    ParallelInsert {
        label: Label,
        target: NodeId,
    },
    /// Removes a fragment. Inside a conditional the branch stays as an empty
    /// branch; deleting an empty branch dissolves a two-way conditional.
    DeleteFragment {
        target: NodeId,
    },
    EmbedInLoop {
        target: NodeId,
        #[serde(default)]
        condition: Condition,
    },
    /// Wraps `target` into `XOR([condition] target, [?] _)`.
    EmbedInConditional {
        target: NodeId,
        #[serde(default)]
        condition: Condition,
    },
    /// Rewrites the guard of a conditional branch or loop body.
    UpdateCondition {
        edge: NodeId,
        condition: Condition,
    },
}

impl PatternInstance {
    pub fn kind(&self) -> PatternKind {
        match self {
            PatternInstance::SerialInsert { .. } => PatternKind::SerialInsert,
            PatternInstance::ParallelInsert { .. } => PatternKind::ParallelInsert,
            PatternInstance::DeleteFragment { .. } => PatternKind::DeleteFragment,
            PatternInstance::EmbedInLoop { .. } => PatternKind::EmbedInLoop,
            PatternInstance::EmbedInConditional { .. } => PatternKind::EmbedInConditional,
            PatternInstance::UpdateCondition { .. } => PatternKind::UpdateCondition,
        }
    }

    /// Label of the activity an insert creates.
    pub fn inserted_label(&self) -> Option<&Label> {
        match self {
            PatternInstance::SerialInsert { label, .. } | PatternInstance::ParallelInsert { label, .. } => Some(label),
            _ => None,
        }
    }

    /// Existing nodes the instance refers to.
    pub fn refs(&self) -> Vec<NodeId> {
        match self {
            PatternInstance::SerialInsert { anchor, .. } => match anchor {
                Position::Gap { sequence, .. } => vec![*sequence],
                Position::Before(node) | Position::After(node) | Position::Skip(node) => vec![*node],
            },
            PatternInstance::ParallelInsert { target, .. }
            | PatternInstance::DeleteFragment { target }
            | PatternInstance::EmbedInLoop { target, .. }
            | PatternInstance::EmbedInConditional { target, .. } => vec![*target],
            PatternInstance::UpdateCondition { edge, .. } => vec![*edge],
        }
    }

    /// The same instance with every node reference passed through `map`.
    pub fn map_refs(&self, map: impl Fn(NodeId) -> NodeId) -> PatternInstance {
        let mut out = self.clone();
        match &mut out {
            PatternInstance::SerialInsert { anchor, .. } => match anchor {
                Position::Gap { sequence, .. } => *sequence = map(*sequence),
                Position::Before(node) | Position::After(node) | Position::Skip(node) => *node = map(*node),
            },
            PatternInstance::ParallelInsert { target, .. }
            | PatternInstance::DeleteFragment { target }
            | PatternInstance::EmbedInLoop { target, .. }
            | PatternInstance::EmbedInConditional { target, .. } => *target = map(*target),
            PatternInstance::UpdateCondition { edge, .. } => *edge = map(*edge),
        }
        out
    }

    fn order_key(&self) -> (PatternKind, Option<&Position>, Option<NodeId>, Option<&Label>, Option<&Condition>) {
        match self {
            PatternInstance::SerialInsert { label, anchor } => {
                (self.kind(), Some(anchor), None, Some(label), None)
            }
            PatternInstance::ParallelInsert { label, target } => {
                (self.kind(), None, Some(*target), Some(label), None)
            }
            PatternInstance::DeleteFragment { target } => (self.kind(), None, Some(*target), None, None),
            PatternInstance::EmbedInLoop { target, condition }
            | PatternInstance::EmbedInConditional { target, condition } => {
                (self.kind(), None, Some(*target), None, Some(condition))
            }
            PatternInstance::UpdateCondition { edge, condition } => {
                (self.kind(), None, Some(*edge), None, Some(condition))
            }
        }
    }
}

/// Kind first, then the referenced node or position, then the remaining
/// parameters.
impl Ord for PatternInstance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for PatternInstance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PatternInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind().as_str();
        match self {
            PatternInstance::SerialInsert { label, anchor } => write!(f, "{kind}({label:?} {anchor})"),
            PatternInstance::ParallelInsert { label, target } => write!(f, "{kind}({label:?} with {target})"),
            PatternInstance::DeleteFragment { target } => write!(f, "{kind}({target})"),
            PatternInstance::EmbedInLoop { target, condition }
            | PatternInstance::EmbedInConditional { target, condition } => {
                write!(f, "{kind}({target} [{condition}])")
            }
            PatternInstance::UpdateCondition { edge, condition } => write!(f, "{kind}({edge} := [{condition}])"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternErrorCode {
    PreconditionViolated,
    UnknownRef,
    WouldBreakStructure,
}

impl PatternErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternErrorCode::PreconditionViolated => "PRECONDITION_VIOLATED",
            PatternErrorCode::UnknownRef => "UNKNOWN_REF",
            PatternErrorCode::WouldBreakStructure => "WOULD_BREAK_STRUCTURE",
        }
    }
}

impl fmt::Display for PatternErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{code}: {detail}")]
pub struct PatternError {
    pub code: PatternErrorCode,
    pub detail: String,
}

impl PatternError {
    pub(crate) fn precondition(detail: impl Into<String>) -> PatternError {
        PatternError { code: PatternErrorCode::PreconditionViolated, detail: detail.into() }
    }

    pub(crate) fn unknown(id: NodeId) -> PatternError {
        PatternError { code: PatternErrorCode::UnknownRef, detail: format!("no node {id}") }
    }

    pub(crate) fn structure(detail: impl Into<String>) -> PatternError {
        PatternError { code: PatternErrorCode::WouldBreakStructure, detail: detail.into() }
    }
}

/// Labels and condition expressions available to a modeler.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub labels: BTreeSet<Label>,
    #[serde(default)]
    pub conditions: BTreeSet<Condition>,
}

impl Alphabet {
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Alphabet {
        Alphabet { labels: labels.into_iter().collect(), conditions: BTreeSet::new() }
    }

    pub fn with_conditions(mut self, conditions: impl IntoIterator<Item = Condition>) -> Alphabet {
        self.conditions.extend(conditions.into_iter().filter(|condition| !condition.is_unset()));
        self
    }

    /// Labels and condition expressions used in `model`.
    pub fn of_model(model: &ProcessModel) -> Alphabet {
        Alphabet::new(model.activities()).with_conditions(model.condition_vocabulary())
    }

    pub fn union(mut self, other: &Alphabet) -> Alphabet {
        self.labels.extend(other.labels.iter().cloned());
        self.conditions.extend(other.conditions.iter().cloned());
        self
    }
}

/// Primitive edit script realizing `pattern` on the graph of `model`.
///
/// Replaying it from `to_graph(model)` yields exactly
/// `to_graph(apply_pattern(model, pattern))`.
pub fn expand_to_primitives(model: &ProcessModel, pattern: &PatternInstance) -> Result<Vec<Primitive>, PatternError> {
    let after = apply_pattern(model, pattern)?;
    Ok(diff(&to_graph(model), &to_graph(&after)))
}

/// Applies `steps` in order, stopping at the first failure.
pub fn apply_all<'a>(
    model: &ProcessModel,
    steps: impl IntoIterator<Item = &'a PatternInstance>,
) -> Result<ProcessModel, PatternError> {
    let mut current = model.clone();
    for step in steps {
        current = apply_pattern(&current, step)?;
    }
    Ok(current)
}
