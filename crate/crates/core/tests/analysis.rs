mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use patternbench::analysis::{
    analyze_session, process_deviations, product_deviations, CountingMode, DeviationOptions, DistanceOptions,
    RegionMap, StepMarker, UndoCounting,
};
use patternbench::model::{Condition, NodeId, NodeKind, ProcessModel};
use patternbench::patterns::{build_steps, Alphabet, PatternInstance, Position};
use patternbench::session::{replay, Action, Session, SessionLog};

use StepMarker::{Detour, FailedTrial, OnOptimalPath};

fn r4() -> ProcessModel {
    fixture_model("r4.model")
}

fn session() -> Session {
    Session::new(SessionLog::new("s", "r4", Alphabet::of_model(&r4()))).unwrap()
}

fn apply(session: &mut Session, pattern: PatternInstance) -> bool {
    let t = session.log().len() as u64 * 1000;
    session.record(Action::Apply { pattern }, t).outcome.is_ok()
}

fn options(mode: CountingMode, undo: UndoCounting) -> DeviationOptions {
    DeviationOptions { mode, undo, ..DeviationOptions::default() }
}

fn markers(log: &SessionLog, options: &DeviationOptions) -> Vec<StepMarker> {
    process_deviations(log, options).unwrap().steps.iter().map(|step| step.marker).collect()
}

fn find(model: &ProcessModel, text: &str) -> NodeId {
    model
        .root()
        .walk()
        .find(|node| matches!(&node.kind, NodeKind::Activity(l) if l.as_str() == text))
        .map(|node| node.id)
        .unwrap()
}

fn after(model: &ProcessModel, id: NodeId) -> Position {
    match model.parent(id) {
        Some(parent) if parent.kind == NodeKind::Sequence => {
            let index = parent.children.iter().position(|child| child.id == id).unwrap();
            Position::Gap { sequence: parent.id, index: index + 1 }
        }
        _ => Position::After(id),
    }
}

#[test]
fn detour_session_replays_to_the_solution() {
    let log = fig3_log();
    assert_eq!(replay(&log, log.len()).unwrap().to_string(), r4().to_string());
}

#[test]
fn detour_session_marks_the_repeated_insert_and_its_delete() {
    let log = fig3_log();
    let regions = RegionMap::from_json(&fixture("r4.regions.json")).unwrap();
    let report = analyze_session(&log, &r4(), Some(&regions), &DeviationOptions::default()).unwrap();
    assert_eq!((report.process_deviations, report.product_deviations), (2, 0));
    let got: Vec<_> = report.per_step.iter().map(|step| step.marker).collect();
    assert_eq!(got, [OnOptimalPath, OnOptimalPath, OnOptimalPath, Detour, Detour, OnOptimalPath]);
    assert_eq!(report.dead_end_steps, [3]);
    assert_eq!((report.per_region["R4"].process, report.per_region["R4"].product), (2, 0));
    assert_eq!(report.minimal_operations, 4);
}

#[test]
fn optimal_session_has_no_deviations() {
    let mut s = session();
    for step in r4_steps() {
        assert!(apply(&mut s, step));
    }
    let report = analyze_session(s.log(), &r4(), None, &DeviationOptions::default()).unwrap();
    assert_eq!((report.process_deviations, report.product_deviations), (0, 0));
    assert!(report.per_step.iter().all(|step| step.marker == OnOptimalPath));
    assert!(report.dead_end_steps.is_empty());
}

#[test]
fn failed_trials_count_only_when_asked() {
    let mut s = session();
    let update = PatternInstance::UpdateCondition { edge: NodeId(0), condition: Condition::expr("c") };
    assert!(!apply(&mut s, update));
    for step in r4_steps() {
        assert!(apply(&mut s, step));
    }
    let strict = process_deviations(s.log(), &options(CountingMode::StateChangingOnly, UndoCounting::Twice)).unwrap();
    assert_eq!((strict.count, strict.failed_trials), (0, 1));
    let lenient = process_deviations(s.log(), &options(CountingMode::IncludeFailed, UndoCounting::Twice)).unwrap();
    assert_eq!(lenient.count, 1);
    assert_eq!(lenient.steps[0].marker, FailedTrial);
}

#[test]
fn undone_detour_counts_per_undo_mode() {
    let mut s = session();
    let steps = r4_steps();
    assert!(apply(&mut s, steps[0].clone()));
    let stray = PatternInstance::SerialInsert { label: label("Y"), anchor: Position::Gap { sequence: NodeId(0), index: 1 } };
    assert!(apply(&mut s, stray));
    assert!(s.record(Action::Undo, 9_000).outcome.is_ok());
    // The undone insert keeps its id reserved, so later ids shift by one.
    let tail = [
        steps[1].clone(),
        PatternInstance::SerialInsert { label: label("Y"), anchor: Position::Skip(NodeId(4)) },
        steps[3].clone(),
    ];
    for step in tail {
        assert!(apply(&mut s, step));
    }
    let count = |undo| process_deviations(s.log(), &options(CountingMode::StateChangingOnly, undo)).unwrap().count;
    assert_eq!(count(UndoCounting::Net), 0);
    assert_eq!(count(UndoCounting::Once), 1);
    assert_eq!(count(UndoCounting::Twice), 2);
    let got = markers(s.log(), &DeviationOptions::default());
    assert_eq!(got, [OnOptimalPath, Detour, Detour, OnOptimalPath, OnOptimalPath, OnOptimalPath]);
}

#[test]
fn renamed_activity_counts_as_its_final_label() {
    let mut s = session();
    let first = PatternInstance::SerialInsert { label: label("Z"), anchor: Position::Gap { sequence: NodeId(0), index: 0 } };
    assert!(apply(&mut s, first));
    for step in &r4_steps()[1..] {
        assert!(apply(&mut s, step.clone()));
    }
    s.record(Action::Rename { node: NodeId(1), label: label("X") }, 50_000);
    let report = analyze_session(s.log(), &r4(), None, &DeviationOptions::default()).unwrap();
    assert_eq!((report.process_deviations, report.product_deviations), (0, 0));
    assert_eq!(report.per_step.len(), 4);
}

#[test]
fn unfinished_session_has_product_deviations_from_the_oracle() {
    let steps = r4_steps();
    for k in 0..=steps.len() {
        let mut s = session();
        for step in &steps[..k] {
            assert!(apply(&mut s, step.clone()));
        }
        let report = analyze_session(s.log(), &r4(), None, &DeviationOptions::default()).unwrap();
        let alphabet = Alphabet::of_model(&r4());
        assert_eq!(report.product_deviations, oracle_distance(s.model(), &r4(), &alphabet, true));
        assert_eq!(report.product_deviations, 4 - k);
        assert_eq!(report.process_deviations, 0);
    }
}

#[test]
fn product_witness_repairs_the_final_model() {
    let built = model("SEQ(Y, X)");
    let product = product_deviations(&built, &r4(), &Alphabet::of_model(&r4()), &DistanceOptions::default()).unwrap();
    let repaired = patternbench::patterns::apply_all(&built, &product.witness).unwrap();
    assert_eq!(repaired.to_string(), r4().to_string());
    assert_eq!(product.count, product.witness.len());
}

// Two regions and the unattributed bucket, counted by hand: two detours on
// E go to the conditional, one pair on G to nothing.
#[test]
fn detours_are_attributed_to_the_smallest_region() {
    let solution = fixture_model("task_a.model");
    let regions = RegionMap::from_json(&fixture("task_a.regions.json")).unwrap();
    let mut s = Session::new(SessionLog::new("s", "task_a", Alphabet::of_model(&solution))).unwrap();
    for step in build_steps(&ProcessModel::new_empty(), &solution).unwrap() {
        assert!(apply(&mut s, step));
    }
    for text in ["E", "G"] {
        let anchor = after(s.model(), find(s.model(), text));
        let fresh = s.model().next_id();
        assert!(apply(&mut s, PatternInstance::SerialInsert { label: label(text), anchor }));
        assert!(apply(&mut s, PatternInstance::DeleteFragment { target: fresh }));
    }
    let report = analyze_session(s.log(), &solution, Some(&regions), &DeviationOptions::default()).unwrap();
    assert_eq!(report.process_deviations, 4);
    assert_eq!(report.product_deviations, 0);
    assert_eq!(report.per_region["choice"].process, 2);
    assert_eq!(report.per_region.get("parallel").map_or(0, |counts| counts.process), 0);
    assert_eq!(report.per_region["∅"].process, 2);
    let total: usize = report.per_region.values().map(|counts| counts.process).sum();
    assert_eq!(total, report.process_deviations);
}

#[test]
fn report_fields_keep_their_order() {
    let report = analyze_session(&fig3_log(), &r4(), None, &DeviationOptions::default()).unwrap();
    let json = report.to_json();
    let keys = [
        "session_id",
        "task_id",
        "mode",
        "undo",
        "process_deviations",
        "product_deviations",
        "counted_operations",
        "minimal_operations",
        "failed_trials",
        "per_step",
        "dead_end_steps",
        "per_region",
        "product_witness",
        "reason_tags",
    ];
    let positions: Vec<usize> = keys.iter().map(|key| json.find(&format!("\"{key}\"")).unwrap()).collect();
    assert!(positions.windows(2).all(|pair| pair[0] < pair[1]), "{json}");
}

fn random_session(seed: u64) -> SessionLog {
    let mut rng = StdRng::seed_from_u64(seed);
    let labels = alphabet(&["A", "B", "C"], &["x"]);
    let mut s = Session::new(SessionLog::new("s", "t", labels.clone())).unwrap();
    for k in 0..rng.gen_range(1..=7) {
        if rng.gen_bool(0.2) {
            s.record(Action::Undo, k * 10);
            continue;
        }
        let (_, steps) = random_walk(&mut rng, s.model(), &labels, 1);
        for step in steps {
            s.record(Action::Apply { pattern: step }, k * 10);
        }
    }
    s.into_log()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn deviation_count_matches_markers(seed in any::<u64>(), include in any::<bool>(), undo in 0..3u8) {
        let log = random_session(seed);
        let undo = [UndoCounting::Net, UndoCounting::Once, UndoCounting::Twice][undo as usize];
        let mode = if include { CountingMode::IncludeFailed } else { CountingMode::StateChangingOnly };
        let process = process_deviations(&log, &options(mode, undo)).unwrap();
        let off_path = process.steps.iter().filter(|s| s.counted && s.marker != OnOptimalPath).count();
        prop_assert_eq!(process.count, off_path);
        prop_assert_eq!(process.count, process.counted_operations - process.minimal_operations);
        let on_path = process.steps.iter().filter(|s| s.counted && s.marker == OnOptimalPath).count();
        prop_assert_eq!(on_path, process.minimal_operations);
    }

    #[test]
    fn net_undo_matches_the_session_without_the_reverted_pair(seed in any::<u64>()) {
        let log = random_session(seed);
        let net = process_deviations(&log, &options(CountingMode::StateChangingOnly, UndoCounting::Net)).unwrap();
        let twice = process_deviations(&log, &options(CountingMode::StateChangingOnly, UndoCounting::Twice)).unwrap();
        let undos = twice.steps.iter().filter(|s| s.counted && log.events[s.event].action == Action::Undo).count();
        prop_assert_eq!(twice.count, net.count + 2 * undos);
    }
}
