use crate::model::{BlockNode, Condition, Label, NodeId, NodeKind, ProcessModel};

use super::{PatternError, PatternInstance, Position};

/// Applies one pattern and returns the resulting model; `model` is never
/// modified.
pub fn apply_pattern(model: &ProcessModel, pattern: &PatternInstance) -> Result<ProcessModel, PatternError> {
    validate(&Index::new(model), pattern)?;
    Ok(apply_validated(model, pattern))
}

/// [`apply_pattern`] for a pattern already known to apply.
pub(crate) fn apply_validated(model: &ProcessModel, pattern: &PatternInstance) -> ProcessModel {
    let mut next = model.clone();
    match pattern {
        PatternInstance::SerialInsert { label, anchor } => serial_insert(&mut next, label, anchor),
        PatternInstance::ParallelInsert { label, target } => parallel_insert(&mut next, label, *target),
        PatternInstance::DeleteFragment { target } => delete_fragment(&mut next, *target),
        PatternInstance::EmbedInLoop { target, condition } => embed_in_loop(&mut next, *target, condition),
        PatternInstance::EmbedInConditional { target, condition } => {
            embed_in_conditional(&mut next, *target, condition)
        }
        PatternInstance::UpdateCondition { edge, condition } => {
            next.node_mut(*edge).expect("validated").condition = Some(condition.clone())
        }
    }
    next.normalize();
    next
}

/// Checks every precondition of `pattern` without building the result.
pub(crate) fn validate(model: &Index<'_>, pattern: &PatternInstance) -> Result<(), PatternError> {
    match pattern {
        PatternInstance::SerialInsert { anchor, .. } => match *anchor {
            Position::Gap { sequence, index } => {
                let node = existing(model, sequence)?;
                if !node.is_sequence() {
                    return Err(PatternError::structure(format!(
                        "{sequence} is a {}, not a sequence",
                        node.kind.name()
                    )));
                }
                if index > node.children.len() {
                    return Err(PatternError::structure(format!("{sequence} has no gap {index}")));
                }
                Ok(())
            }
            Position::Before(target) | Position::After(target) => {
                let node = existing(model, target)?;
                if node.is_sequence() || node.is_skip() {
                    return Err(PatternError::structure(format!("no position next to a {}", node.kind.name())));
                }
                if model.parent(target).is_some_and(BlockNode::is_sequence) {
                    return Err(PatternError::structure(format!("{target} sits in a sequence; use one of its gaps")));
                }
                Ok(())
            }
            Position::Skip(target) => {
                if !existing(model, target)?.is_skip() {
                    return Err(PatternError::structure(format!("{target} is not an empty branch")));
                }
                Ok(())
            }
        },
        PatternInstance::ParallelInsert { target, .. } => fragment(model, *target).map(drop),
        PatternInstance::DeleteFragment { target } => {
            if existing(model, *target)?.is_skip() {
                Ok(())
            } else {
                fragment(model, *target).map(drop)
            }
        }
        PatternInstance::EmbedInLoop { target, condition } => {
            let node = fragment(model, *target)?;
            let in_loop = model.parent(*target).is_some_and(|parent| matches!(parent.kind, NodeKind::Loop));
            if in_loop && node.condition.as_ref() == Some(condition) {
                return Err(PatternError::precondition(format!(
                    "{target} already is a loop body with this condition"
                )));
            }
            Ok(())
        }
        PatternInstance::EmbedInConditional { target, condition } => {
            let node = fragment(model, *target)?;
            let already_optional = model.parent(*target).is_some_and(|parent| {
                matches!(parent.kind, NodeKind::Conditional)
                    && parent.children.len() == 2
                    && parent.children.iter().any(|child| child.is_skip() && child.condition == Some(Condition::Unset))
            });
            if already_optional && node.condition.as_ref() == Some(condition) {
                return Err(PatternError::precondition(format!("{target} already is optional with this condition")));
            }
            Ok(())
        }
        PatternInstance::UpdateCondition { edge, condition } => match &existing(model, *edge)?.condition {
            None => Err(PatternError::precondition(format!(
                "{edge} is neither a conditional branch nor a loop body"
            ))),
            Some(current) if current == condition => {
                Err(PatternError::precondition(format!("{edge} already has condition [{condition}]")))
            }
            Some(_) => Ok(()),
        },
    }
}

/// Constant-time node and parent lookup for one model.
pub(crate) struct Index<'a> {
    root: &'a BlockNode,
    slots: Vec<Option<(&'a BlockNode, Option<&'a BlockNode>)>>,
}

impl<'a> Index<'a> {
    pub(crate) fn new(model: &'a ProcessModel) -> Index<'a> {
        let mut slots = vec![None; model.next_id().0 as usize];
        fn fill<'a>(
            node: &'a BlockNode,
            parent: Option<&'a BlockNode>,
            slots: &mut Vec<Option<(&'a BlockNode, Option<&'a BlockNode>)>>,
        ) {
            slots[node.id.0 as usize] = Some((node, parent));
            for child in &node.children {
                fill(child, Some(node), slots);
            }
        }
        fill(model.root(), None, &mut slots);
        Index { root: model.root(), slots }
    }

    pub(crate) fn node(&self, id: NodeId) -> Option<&'a BlockNode> {
        self.slots.get(id.0 as usize).copied().flatten().map(|(node, _)| node)
    }

    pub(crate) fn parent(&self, id: NodeId) -> Option<&'a BlockNode> {
        self.slots.get(id.0 as usize).copied().flatten().and_then(|(_, parent)| parent)
    }

    pub(crate) fn root(&self) -> &'a BlockNode {
        self.root
    }
}

fn existing<'a>(model: &Index<'a>, id: NodeId) -> Result<&'a BlockNode, PatternError> {
    model.node(id).ok_or_else(|| PatternError::unknown(id))
}

/// A whole single-entry single-exit subtree: any node except empty branches,
/// and the root only when it holds more than one child.
pub(crate) fn fragment<'a>(model: &Index<'a>, id: NodeId) -> Result<&'a BlockNode, PatternError> {
    let node = existing(model, id)?;
    if node.is_skip() {
        return Err(PatternError::structure(format!("{id} is an empty branch, not a fragment")));
    }
    if node.id == model.root().id && node.children.len() < 2 {
        return Err(PatternError::structure("the root is a fragment only with two or more children"));
    }
    Ok(node)
}

fn is_root(model: &ProcessModel, id: NodeId) -> bool {
    model.root().id == id
}

/// Replaces node `id` by `make(node)`. Replacing the root puts the result
/// under a fresh root sequence.
fn rewrap(model: &mut ProcessModel, id: NodeId, make: impl FnOnce(BlockNode) -> BlockNode) {
    if is_root(model, id) {
        let root_id = model.alloc_id();
        let old = std::mem::replace(model.root_mut(), BlockNode::new(root_id, NodeKind::Sequence, Vec::new()));
        let wrapped = make(old);
        model.root_mut().children.push(wrapped);
    } else {
        let slot = model.node_mut(id).expect("checked by caller");
        let old = std::mem::replace(slot, BlockNode::skip(NodeId(u32::MAX)));
        *slot = make(old);
    }
}

/// `kind(inner, others..)` (or `kind(others.., inner)`), taking over the
/// guard of `inner`, which gets `inner_guard` instead.
fn enclose(
    id: NodeId,
    kind: NodeKind,
    mut inner: BlockNode,
    inner_guard: Option<Condition>,
    others: Vec<BlockNode>,
    inner_first: bool,
) -> BlockNode {
    let guard = std::mem::replace(&mut inner.condition, inner_guard);
    let mut children = Vec::with_capacity(others.len() + 1);
    if inner_first {
        children.push(inner);
        children.extend(others);
    } else {
        children.extend(others);
        children.push(inner);
    }
    BlockNode { id, kind, children, condition: guard }
}

fn serial_insert(model: &mut ProcessModel, label: &Label, anchor: &Position) {
    match *anchor {
        Position::Gap { sequence, index } => {
            let activity = BlockNode::activity(model.alloc_id(), label.clone());
            model.node_mut(sequence).expect("validated").children.insert(index, activity);
        }
        Position::Before(target) | Position::After(target) => {
            let activity = BlockNode::activity(model.alloc_id(), label.clone());
            let sequence = model.alloc_id();
            let after = matches!(anchor, Position::After(_));
            rewrap(model, target, |old| enclose(sequence, NodeKind::Sequence, old, None, vec![activity], after));
        }
        Position::Skip(target) => {
            let id = model.alloc_id();
            let slot = model.node_mut(target).expect("validated");
            *slot = BlockNode {
                id,
                kind: NodeKind::Activity(label.clone()),
                children: Vec::new(),
                condition: slot.condition.take(),
            };
        }
    }
}

fn parallel_insert(model: &mut ProcessModel, label: &Label, target: NodeId) {
    let activity = BlockNode::activity(model.alloc_id(), label.clone());
    let parent = model.parent(target).map(|parent| (parent.id, matches!(parent.kind, NodeKind::Parallel)));
    match parent {
        Some((parent, true)) => model.node_mut(parent).expect("exists").children.push(activity),
        _ => {
            let block = model.alloc_id();
            rewrap(model, target, |old| enclose(block, NodeKind::Parallel, old, None, vec![activity], true));
        }
    }
}

fn delete_fragment(model: &mut ProcessModel, target: NodeId) {
    if is_root(model, target) {
        model.root_mut().children.clear();
        return;
    }
    let parent = model.parent(target).expect("not the root");
    let parent_id = parent.id;
    let skip = model.node(target).is_some_and(BlockNode::is_skip);
    if matches!(parent.kind, NodeKind::Conditional) && !skip {
        let slot = model.node_mut(target).expect("exists");
        *slot = BlockNode { id: target, kind: NodeKind::Skip, children: Vec::new(), condition: slot.condition.take() };
    } else {
        model.node_mut(parent_id).expect("exists").children.retain(|child| child.id != target);
    }
}

fn embed_in_loop(model: &mut ProcessModel, target: NodeId, condition: &Condition) {
    let block = model.alloc_id();
    let guard = Some(condition.clone());
    rewrap(model, target, |old| enclose(block, NodeKind::Loop, old, guard, Vec::new(), true));
}

fn embed_in_conditional(model: &mut ProcessModel, target: NodeId, condition: &Condition) {
    let block = model.alloc_id();
    let skip = BlockNode::skip(model.alloc_id()).with_condition(Condition::Unset);
    let guard = Some(condition.clone());
    rewrap(model, target, |old| enclose(block, NodeKind::Conditional, old, guard, vec![skip], true));
}
