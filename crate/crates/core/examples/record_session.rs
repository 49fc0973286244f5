//! Records the detour session for the two-branch conditional `XOR([c] X, Y)`:
//! the second activity is inserted twice and the duplicate deleted again.
//! Prints the session as JSONL.

use patternbench::model::{Condition, Label, NodeId};
use patternbench::patterns::{Alphabet, PatternInstance, Position};
use patternbench::session::{replay, Action, Session, SessionLog};

fn label(text: &str) -> Label {
    Label::new(text).expect("valid label")
}

fn main() {
    let alphabet = Alphabet::new([label("X"), label("Y")]).with_conditions([Condition::expr("c")]);
    let mut session = Session::new(SessionLog::new("fig3", "r4", alphabet)).expect("empty log");

    let steps = [
        PatternInstance::SerialInsert { label: label("X"), anchor: Position::Gap { sequence: NodeId(0), index: 0 } },
        PatternInstance::EmbedInConditional { target: NodeId(1), condition: Condition::Unset },
        PatternInstance::SerialInsert { label: label("Y"), anchor: Position::Skip(NodeId(3)) },
        // Looks like nothing happened on the canvas, so Y goes in again.
        PatternInstance::SerialInsert { label: label("Y"), anchor: Position::After(NodeId(4)) },
        PatternInstance::DeleteFragment { target: NodeId(5) },
        PatternInstance::UpdateCondition { edge: NodeId(1), condition: Condition::expr("c") },
    ];
    for (k, pattern) in steps.into_iter().enumerate() {
        let event = session.record(Action::Apply { pattern }, 4_000 * k as u64);
        assert!(event.outcome.is_ok(), "step {k}: {:?}", event.outcome);
    }

    let log = session.into_log();
    eprintln!("final model: {}", replay(&log, log.len()).expect("replays"));
    print!("{}", log.to_jsonl());
}
