use std::collections::BTreeSet;

use crate::model::{BlockNode, Condition, Label, NodeId, NodeKind, ProcessModel};

use super::apply::{validate, Index};
use super::{Alphabet, PatternInstance, Position};

/// Every instance `apply_pattern` accepts on `model`, sorted.
///
/// Insert labels come from `alphabet` (or the model's own labels). Embeds are
/// offered with an UNSET condition only; concrete conditions are set with
/// UPDATE_CONDITION, choosing from the alphabet's and the model's condition
/// expressions.
pub fn applicable_patterns(model: &ProcessModel, alphabet: Option<&Alphabet>) -> Vec<PatternInstance> {
    applicable_where(model, alphabet, |_| true)
}

/// Applicable instances among the candidates `keep` accepts.
pub(crate) fn applicable_where(
    model: &ProcessModel,
    alphabet: Option<&Alphabet>,
    keep: impl Fn(&PatternInstance) -> bool,
) -> Vec<PatternInstance> {
    let index = Index::new(model);
    let mut found: Vec<PatternInstance> = candidates(model, alphabet)
        .into_iter()
        .filter(|pattern| keep(pattern) && validate(&index, pattern).is_ok())
        .collect();
    found.sort();
    found.dedup();
    found
}

/// Syntactically formable instances; a superset of the applicable ones.
pub(crate) fn candidates(model: &ProcessModel, alphabet: Option<&Alphabet>) -> Vec<PatternInstance> {
    let labels: BTreeSet<Label> = match alphabet {
        Some(alphabet) => alphabet.labels.clone(),
        None => model.activities().into_iter().collect(),
    };
    let mut conditions: BTreeSet<Condition> = model.condition_vocabulary().into_iter().collect();
    if let Some(alphabet) = alphabet {
        conditions.extend(alphabet.conditions.iter().filter(|c| !c.is_unset()).cloned());
    }
    conditions.insert(Condition::Unset);

    let positions = positions(model);
    let fragments = fragments(model);
    let mut out = Vec::new();
    for label in &labels {
        for anchor in &positions {
            out.push(PatternInstance::SerialInsert { label: label.clone(), anchor: anchor.clone() });
        }
        for &target in &fragments {
            out.push(PatternInstance::ParallelInsert { label: label.clone(), target });
        }
    }
    for &target in &fragments {
        out.push(PatternInstance::DeleteFragment { target });
        out.push(PatternInstance::EmbedInLoop { target, condition: Condition::Unset });
        out.push(PatternInstance::EmbedInConditional { target, condition: Condition::Unset });
    }
    for node in model.root().walk() {
        if node.is_skip() {
            out.push(PatternInstance::DeleteFragment { target: node.id });
        }
        if let Some(current) = &node.condition {
            for condition in conditions.iter().filter(|c| *c != current) {
                out.push(PatternInstance::UpdateCondition { edge: node.id, condition: condition.clone() });
            }
        }
    }
    out
}

/// All places a serial insert can target.
pub fn positions(model: &ProcessModel) -> Vec<Position> {
    let mut out = Vec::new();
    collect_positions(model.root(), None, &mut out);
    out
}

fn collect_positions(node: &BlockNode, parent: Option<&NodeKind>, out: &mut Vec<Position>) {
    match node.kind {
        NodeKind::Sequence => {
            out.extend((0..=node.children.len()).map(|index| Position::Gap { sequence: node.id, index }))
        }
        NodeKind::Skip => out.push(Position::Skip(node.id)),
        _ if parent.is_some_and(|kind| !matches!(kind, NodeKind::Sequence)) => {
            out.push(Position::Before(node.id));
            out.push(Position::After(node.id));
        }
        _ => {}
    }
    for child in &node.children {
        collect_positions(child, Some(&node.kind), out);
    }
}

/// Ids of every fragment: all nodes except empty branches, plus the root
/// when it has two or more children.
pub fn fragments(model: &ProcessModel) -> Vec<NodeId> {
    let root = model.root();
    let mut out: Vec<NodeId> = Vec::new();
    if root.children.len() >= 2 {
        out.push(root.id);
    }
    out.extend(root.walk().skip(1).filter(|node| !node.is_skip()).map(|node| node.id));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::PatternKind;

    fn label(text: &str) -> Label {
        Label::new(text).unwrap()
    }

    #[test]
    fn empty_model_offers_a_single_insert() {
        let alphabet = Alphabet::new([label("A")]);
        let found = applicable_patterns(&ProcessModel::new_empty(), Some(&alphabet));
        assert_eq!(found, vec![PatternInstance::SerialInsert {
            label: label("A"),
            anchor: Position::Gap { sequence: NodeId(0), index: 0 },
        }]);
    }

    #[test]
    fn single_activity_offers_every_kind_but_update() {
        let model: ProcessModel = "SEQ(A)".parse().unwrap();
        let found = applicable_patterns(&model, Some(&Alphabet::new([label("B")])));
        let a = NodeId(1);
        for expected in [
            PatternInstance::SerialInsert { label: label("B"), anchor: Position::Gap { sequence: NodeId(0), index: 0 } },
            PatternInstance::SerialInsert { label: label("B"), anchor: Position::Gap { sequence: NodeId(0), index: 1 } },
            PatternInstance::ParallelInsert { label: label("B"), target: a },
            PatternInstance::EmbedInLoop { target: a, condition: Condition::Unset },
            PatternInstance::EmbedInConditional { target: a, condition: Condition::Unset },
            PatternInstance::DeleteFragment { target: a },
        ] {
            assert!(found.contains(&expected), "missing {expected}");
        }
        assert_eq!(found.len(), 6);
        assert!(found.windows(2).all(|pair| pair[0] < pair[1]));
        assert!(found.iter().all(|p| p.kind() != PatternKind::UpdateCondition));
    }

    #[test]
    fn update_values_come_from_vocabulary() {
        let model: ProcessModel = "SEQ(XOR([x] A, _))".parse().unwrap();
        let alphabet = Alphabet::new([label("A")]).with_conditions([Condition::expr("y")]);
        let updates: Vec<_> = applicable_patterns(&model, Some(&alphabet))
            .into_iter()
            .filter(|p| p.kind() == PatternKind::UpdateCondition)
            .collect();
        // A: x -> y, ?; skip: ? -> x, y
        assert_eq!(updates.len(), 4);
    }
}
