use crate::model::{canonical_key, NodeId, NodeKind, ProcessModel};

use super::builder::{first_label, Place};
use super::{apply_all, apply_pattern, build_steps, Builder, PatternError, PatternInstance, Position};

/// Patterns that undo `pattern` on `apply_pattern(before, pattern)`,
/// restoring `before` up to canonical form.
///
/// Inserts are undone by deleting the new activity, conditional embeds by
/// deleting the added empty branch, and condition updates by restoring the
/// old value. Deleted fragments and loop embeds are rebuilt in place where
/// the surrounding block survived, otherwise the whole model is rebuilt.
pub fn invert(before: &ProcessModel, pattern: &PatternInstance) -> Result<Vec<PatternInstance>, PatternError> {
    let after = apply_pattern(before, pattern)?;
    let goal = canonical_key(before);
    let restores = |steps: &[PatternInstance]| {
        apply_all(&after, steps).is_ok_and(|model| canonical_key(&model) == goal)
    };
    for candidate in natural(before, pattern, &after) {
        if restores(&candidate) {
            return Ok(candidate);
        }
    }
    match build_steps(&after, before) {
        Ok(steps) if restores(&steps) => Ok(steps),
        Ok(_) => Err(PatternError::precondition("no pattern sequence restores the previous model")),
        Err(error) => Err(PatternError::precondition(format!("previous model cannot be rebuilt: {error}"))),
    }
}

fn natural(before: &ProcessModel, pattern: &PatternInstance, after: &ProcessModel) -> Vec<Vec<PatternInstance>> {
    let fresh = before.next_id();
    match pattern {
        PatternInstance::SerialInsert { .. } | PatternInstance::ParallelInsert { .. } => {
            vec![vec![PatternInstance::DeleteFragment { target: fresh }]]
        }
        PatternInstance::EmbedInConditional { .. } => {
            vec![vec![PatternInstance::DeleteFragment { target: NodeId(fresh.0 + 1) }]]
        }
        PatternInstance::UpdateCondition { edge, .. } => {
            let previous = before.node(*edge).and_then(|node| node.condition.clone()).unwrap_or_default();
            vec![vec![PatternInstance::UpdateCondition { edge: *edge, condition: previous }]]
        }
        PatternInstance::DeleteFragment { target } => {
            let node = before.node(*target).expect("applied");
            if node.is_skip() {
                restore_empty_branch(before, *target, after).into_iter().collect()
            } else {
                rebuild_in_place(before, *target, after, Vec::new()).into_iter().collect()
            }
        }
        PatternInstance::EmbedInLoop { target, .. } => {
            let delete = PatternInstance::DeleteFragment { target: fresh };
            let Ok(without) = apply_pattern(after, &delete) else { return Vec::new() };
            rebuild_in_place(before, *target, &without, vec![delete]).into_iter().collect()
        }
    }
}

/// Undoes the dissolution of a two-way conditional: embed the surviving
/// branch again and restore both guards.
fn restore_empty_branch(before: &ProcessModel, skip: NodeId, after: &ProcessModel) -> Option<Vec<PatternInstance>> {
    let block = before.parent(skip)?;
    if block.children.len() != 2 {
        return None;
    }
    let empty_guard = before.node(skip)?.condition.clone()?;
    let survivor = block.children.iter().find(|child| child.id != skip)?;
    after.node(survivor.id)?;
    let mut steps = vec![PatternInstance::EmbedInConditional {
        target: survivor.id,
        condition: survivor.condition.clone()?,
    }];
    if !empty_guard.is_unset() {
        steps.push(PatternInstance::UpdateCondition { edge: NodeId(after.next_id().0 + 1), condition: empty_guard });
    }
    Some(steps)
}

/// Grows the subtree `target` of `before` again inside `current`, a model in
/// which it was removed but its parent block survived.
fn rebuild_in_place(
    before: &ProcessModel,
    target: NodeId,
    current: &ProcessModel,
    prefix: Vec<PatternInstance>,
) -> Option<Vec<PatternInstance>> {
    let subtree = before.node(target)?;
    let parent = before.parent(target)?;
    let now = current.node(parent.id)?;
    if std::mem::discriminant(&now.kind) != std::mem::discriminant(&parent.kind) {
        return None;
    }
    let mut builder = Builder::new(current.clone());
    builder.steps = prefix;
    match parent.kind {
        NodeKind::Sequence => {
            if now.children.len() + 1 != parent.children.len() {
                return None;
            }
            let index = parent.children.iter().position(|child| child.id == target)?;
            builder.realize(subtree, Place::At(Position::Gap { sequence: parent.id, index })).ok()?;
        }
        NodeKind::Conditional => {
            if now.children.len() != parent.children.len() {
                return None;
            }
            let empty = now.children.iter().find(|child| child.is_skip())?.id;
            builder.realize(subtree, Place::At(Position::Skip(empty))).ok()?;
        }
        NodeKind::Parallel => {
            if now.children.len() + 1 != parent.children.len() {
                return None;
            }
            let sibling = now.children[0].id;
            let seed = builder.model.next_id();
            builder
                .steps
                .push(PatternInstance::ParallelInsert { label: first_label(subtree).clone(), target: sibling });
            builder.model = apply_pattern(&builder.model, builder.steps.last().expect("just pushed")).ok()?;
            builder.realize(subtree, Place::Seeded(seed)).ok()?;
        }
        _ => return None,
    }
    Some(builder.steps)
}
