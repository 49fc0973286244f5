//! Builds a small model one pattern at a time, lists what applies at each
//! step and undoes the last change with its inverse.

use patternbench::model::{Condition, Label, NodeId, ProcessModel};
use patternbench::patterns::{
    applicable_patterns, apply_all, apply_pattern, expand_to_primitives, invert, Alphabet, PatternInstance, Position,
};

fn label(text: &str) -> Label {
    Label::new(text).expect("valid label")
}

fn main() {
    let alphabet = Alphabet::new([label("A"), label("B")]).with_conditions([Condition::expr("ok")]);
    let steps = [
        PatternInstance::SerialInsert { label: label("A"), anchor: Position::Gap { sequence: NodeId(0), index: 0 } },
        PatternInstance::ParallelInsert { label: label("B"), target: NodeId(1) },
        PatternInstance::EmbedInConditional { target: NodeId(2), condition: Condition::expr("ok") },
    ];

    let mut model = ProcessModel::new_empty();
    for pattern in &steps {
        let options = applicable_patterns(&model, Some(&alphabet));
        println!("{model}: {} applicable", options.len());
        let primitives = expand_to_primitives(&model, pattern).expect("applies");
        println!("  {pattern} -> {} graph edits", primitives.len());
        model = apply_pattern(&model, pattern).expect("applies");
    }
    println!("{model}");

    let last = steps.last().unwrap();
    let before = apply_all(&ProcessModel::new_empty(), &steps[..steps.len() - 1]).unwrap();
    let undo = invert(&before, last).expect("invertible");
    let restored = apply_all(&model, &undo).unwrap();
    println!("undo {}: {restored}", undo.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ; "));

    let refused = PatternInstance::DeleteFragment { target: NodeId(40) };
    if let Err(error) = apply_pattern(&model, &refused) {
        println!("{refused}: {} ({})", error.code, error.detail);
    }
}
