//! Splits a recorded session into modeling, comprehension and
//! reconciliation stretches.

use patternbench::session::{segment_phases, PhaseConfig, SessionLog};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig3.jsonl").into());
    let log = SessionLog::from_jsonl(&std::fs::read_to_string(&path).expect("readable log")).expect("session log");
    let config = PhaseConfig { comprehension_gap_ms: 4_000, ..PhaseConfig::default() };
    for segment in segment_phases(&log, &config) {
        println!("{:>7}..{:<7} {:?} events {:?}", segment.start_ms, segment.end_ms, segment.kind, segment.events);
    }
}
