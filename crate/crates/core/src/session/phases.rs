//! Heuristic split of a session into comprehension, modeling and
//! reconciliation phases.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{ActionKind, SessionLog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseKind {
    Comprehension,
    Modeling,
    Reconciliation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseConfig {
    /// Pauses at least this long count as comprehension.
    pub comprehension_gap_ms: u64,
    pub reconciliation_actions: BTreeSet<ActionKind>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            comprehension_gap_ms: 10_000,
            reconciliation_actions: BTreeSet::from([ActionKind::Rename, ActionKind::Layout]),
        }
    }
}

/// A stretch of the session timeline. `events` indexes into the log; it is
/// empty for comprehension pauses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSegment {
    pub kind: PhaseKind,
    pub start_ms: u64,
    pub end_ms: u64,
    pub events: Range<usize>,
}

/// Segments covering `[0, last timestamp]` without overlap; every event is in
/// exactly one segment.
pub fn segment_phases(log: &SessionLog, config: &PhaseConfig) -> Vec<PhaseSegment> {
    let mut out: Vec<PhaseSegment> = Vec::new();
    let mut previous = 0;
    for (index, event) in log.events.iter().enumerate() {
        let t = event.t_ms;
        if t - previous >= config.comprehension_gap_ms && t > previous {
            out.push(PhaseSegment { kind: PhaseKind::Comprehension, start_ms: previous, end_ms: t, events: index..index });
        }
        let kind = if config.reconciliation_actions.contains(&event.action.kind()) {
            PhaseKind::Reconciliation
        } else {
            PhaseKind::Modeling
        };
        match out.last_mut() {
            Some(last) if last.kind == kind => {
                last.end_ms = t;
                last.events.end = index + 1;
            }
            _ => {
                let start_ms = out.last().map_or(0, |last| last.end_ms);
                out.push(PhaseSegment { kind, start_ms, end_ms: t, events: index..index + 1 });
            }
        }
        previous = t;
    }
    out
}
