//! Constructive pattern sequences: clear a model and grow a target tree.
//!
//! Each block is grown from its leftmost activity: the activity is placed,
//! the block is wrapped around it, and the remaining branches and sequence
//! members are added next to it. Guards are set last.

use thiserror::Error;

use crate::model::{BlockNode, Condition, Label, NodeId, NodeKind, ProcessModel};

use super::{apply_pattern, PatternError, PatternInstance, Position};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("conditional {0} has {1} non-empty branches; patterns only build two-way conditionals")]
    WideConditional(NodeId, usize),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Whether `target` can be reached from the empty model at all.
pub fn constructible(target: &ProcessModel) -> bool {
    wide_conditional(target.root()).is_none()
}

fn wide_conditional(node: &BlockNode) -> Option<(NodeId, usize)> {
    if matches!(node.kind, NodeKind::Conditional) {
        let filled = node.children.iter().filter(|child| !child.is_skip()).count();
        if filled > 2 {
            return Some((node.id, filled));
        }
    }
    node.children.iter().find_map(wide_conditional)
}

/// Patterns that turn `start` into a model canonically equal to `target`:
/// delete everything, then grow `target` from nothing.
pub fn build_steps(start: &ProcessModel, target: &ProcessModel) -> Result<Vec<PatternInstance>, BuildError> {
    if let Some((id, filled)) = wide_conditional(target.root()) {
        return Err(BuildError::WideConditional(id, filled));
    }
    let mut builder = Builder::new(start.clone());
    builder.clear()?;
    let root = builder.model.root().id;
    for (index, child) in target.root().children.iter().enumerate() {
        builder.realize(child, Place::At(Position::Gap { sequence: root, index }))?;
    }
    Ok(builder.steps)
}

pub(crate) enum Place {
    At(Position),
    /// The leftmost activity of the subtree already exists as this node.
    Seeded(NodeId),
}

pub(crate) struct Builder {
    pub(crate) model: ProcessModel,
    pub(crate) steps: Vec<PatternInstance>,
}

/// Label of the activity a subtree is grown from.
pub(crate) fn first_label(node: &BlockNode) -> &Label {
    match &node.kind {
        NodeKind::Activity(label) => label,
        _ => first_label(node.children.iter().find(|child| !child.is_skip()).expect("blocks contain activities")),
    }
}

impl Builder {
    pub(crate) fn new(model: ProcessModel) -> Builder {
        Builder { model, steps: Vec::new() }
    }

    fn apply(&mut self, pattern: PatternInstance) -> Result<(), BuildError> {
        self.model = apply_pattern(&self.model, &pattern)?;
        self.steps.push(pattern);
        Ok(())
    }

    fn parent(&self, id: NodeId) -> &BlockNode {
        self.model.parent(id).expect("grown nodes are never the root")
    }

    fn clear(&mut self) -> Result<(), BuildError> {
        let root = self.model.root();
        let target = match root.children.len() {
            0 => return Ok(()),
            1 => root.children[0].id,
            _ => root.id,
        };
        self.apply(PatternInstance::DeleteFragment { target })
    }

    /// Inserts a single activity and returns its id.
    fn insert(&mut self, label: &Label, anchor: Position) -> Result<NodeId, BuildError> {
        let id = self.model.next_id();
        self.apply(PatternInstance::SerialInsert { label: label.clone(), anchor })?;
        Ok(id)
    }

    fn parallel(&mut self, label: &Label, target: NodeId) -> Result<NodeId, BuildError> {
        let id = self.model.next_id();
        self.apply(PatternInstance::ParallelInsert { label: label.clone(), target })?;
        Ok(id)
    }

    /// Position right after `id` at its sequence level.
    fn after(&self, id: NodeId) -> Position {
        let parent = self.parent(id);
        if parent.is_sequence() {
            let index = parent.children.iter().position(|child| child.id == id).expect("child of its parent");
            Position::Gap { sequence: parent.id, index: index + 1 }
        } else {
            Position::After(id)
        }
    }

    fn set_guard(&mut self, id: NodeId, wanted: &Option<Condition>) -> Result<(), BuildError> {
        let Some(wanted) = wanted else { return Ok(()) };
        let current = self.model.node(id).and_then(|node| node.condition.clone());
        if current.as_ref() != Some(wanted) {
            self.apply(PatternInstance::UpdateCondition { edge: id, condition: wanted.clone() })?;
        }
        Ok(())
    }

    /// Appends `rest` after `first` at its sequence level. Returns the node
    /// standing for the whole run.
    fn extend_sequence(&mut self, first: NodeId, rest: &[BlockNode]) -> Result<NodeId, BuildError> {
        let mut previous = first;
        for node in rest {
            let anchor = self.after(previous);
            previous = self.realize(node, Place::At(anchor))?;
        }
        Ok(if rest.is_empty() { first } else { self.parent(first).id })
    }

    /// Grows `target` at `place` and returns the id of the node realizing it.
    /// Guards of `target` itself are left to the caller.
    pub(crate) fn realize(&mut self, target: &BlockNode, place: Place) -> Result<NodeId, BuildError> {
        match &target.kind {
            NodeKind::Activity(label) => match place {
                Place::At(anchor) => self.insert(label, anchor),
                Place::Seeded(id) => Ok(id),
            },
            NodeKind::Skip => unreachable!("empty branches are never grown"),
            NodeKind::Sequence => {
                let first = self.realize(&target.children[0], place)?;
                self.extend_sequence(first, &target.children[1..])
            }
            NodeKind::Parallel | NodeKind::Conditional | NodeKind::Loop => self.realize_block(target, place),
        }
    }

    fn realize_block(&mut self, target: &BlockNode, place: Place) -> Result<NodeId, BuildError> {
        let mut branches: Vec<&BlockNode> = target.children.iter().filter(|child| !child.is_skip()).collect();
        let skip_branch = target.children.iter().find(|child| child.is_skip());
        if matches!(target.kind, NodeKind::Conditional) && branches.len() > 2 {
            return Err(BuildError::WideConditional(target.id, branches.len()));
        }
        let first_branch = branches.remove(0);
        let (head, tail) = if first_branch.is_sequence() {
            (&first_branch.children[0], &first_branch.children[1..])
        } else {
            (first_branch, &[][..])
        };
        let seed = self.realize(head, place)?;
        match target.kind {
            NodeKind::Parallel => {
                let second = first_label(branches[0]);
                let seeds_start = if matches!(self.parent(seed).kind, NodeKind::Parallel) {
                    // Appending would join the enclosing block; give the seed
                    // a temporary sequence neighbour first.
                    let anchor = Position::After(seed);
                    let placeholder = self.insert(second, anchor)?;
                    let id = self.parallel(second, seed)?;
                    self.apply(PatternInstance::DeleteFragment { target: placeholder })?;
                    id
                } else {
                    self.parallel(second, seed)?
                };
                let first = self.extend_sequence(seed, tail)?;
                let mut seeds = vec![seeds_start];
                for branch in &branches[1..] {
                    seeds.push(self.parallel(first_label(branch), first)?);
                }
                for (branch, seed) in branches.iter().zip(seeds) {
                    self.realize(branch, Place::Seeded(seed))?;
                }
                Ok(self.parent(first).id)
            }
            NodeKind::Conditional => {
                self.apply(PatternInstance::EmbedInConditional { target: seed, condition: Condition::Unset })?;
                let block = self.parent(seed).id;
                let empty = self.parent(seed).children.iter().find(|c| c.is_skip()).expect("fresh empty branch").id;
                let first = self.extend_sequence(seed, tail)?;
                let mut guards = vec![(first, &first_branch.condition)];
                match branches.first() {
                    Some(second) => {
                        let id = self.realize(second, Place::At(Position::Skip(empty)))?;
                        guards.push((id, &second.condition));
                    }
                    None => guards.push((empty, &skip_branch.expect("one empty branch").condition)),
                }
                for (id, guard) in guards {
                    self.set_guard(id, guard)?;
                }
                Ok(block)
            }
            NodeKind::Loop => {
                self.apply(PatternInstance::EmbedInLoop { target: seed, condition: Condition::Unset })?;
                let block = self.parent(seed).id;
                let body = self.extend_sequence(seed, tail)?;
                self.set_guard(body, &first_branch.condition)?;
                Ok(block)
            }
            _ => unreachable!("only blocks"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonicalize;
    use crate::patterns::apply_all;

    fn check(start: &str, target: &str) -> usize {
        let start: ProcessModel = start.parse().unwrap();
        let target: ProcessModel = target.parse().unwrap();
        let steps = build_steps(&start, &target).unwrap();
        let result = apply_all(&start, &steps).unwrap();
        assert_eq!(canonicalize(&result).digest, canonicalize(&target).digest, "{target} built as {result}");
        steps.len()
    }

    #[test]
    fn builds_nested_structures() {
        for target in [
            "SEQ()",
            "SEQ(A, B, C)",
            "SEQ(XOR([x] X, Y))",
            "SEQ(AND(SEQ(A, B), C, LOOP([again] D)))",
            "SEQ(AND(AND(A, B), C))",
            "SEQ(XOR([p] SEQ(A, AND(B, C)), [q] _), LOOP(SEQ(XOR(D, _), E)))",
            "SEQ(LOOP(LOOP([w] A)), XOR(XOR(B, _), _))",
            "SEQ(AND(XOR([a] AND(A, B), C), SEQ(LOOP(D), E)))",
        ] {
            check("SEQ()", target);
            check("SEQ(Q, AND(R, S))", target);
        }
    }

    #[test]
    fn conditional_build_takes_four_steps() {
        assert_eq!(check("SEQ()", "SEQ(XOR([c] X, Y))"), 4);
    }

    #[test]
    fn wide_conditionals_are_not_constructible() {
        let target: ProcessModel = "SEQ(XOR(A, B, C))".parse().unwrap();
        assert!(!constructible(&target));
        assert!(matches!(build_steps(&ProcessModel::new_empty(), &target), Err(BuildError::WideConditional(_, 3))));
    }
}
