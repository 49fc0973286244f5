//! Modeling sessions: a timestamped log of everything a designer did,
//! replayable to the model state after any prefix.

mod phases;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Condition, Label, NodeId, NodeKind, ProcessModel};
use crate::patterns::{apply_pattern, Alphabet, PatternErrorCode, PatternInstance};

pub use phases::{segment_phases, PhaseConfig, PhaseKind, PhaseSegment};

pub const SESSION_FORMAT: &str = "patternbench-session";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Apply { pattern: PatternInstance },
    /// Reverts the most recent successful apply that is not reverted yet.
    Undo,
    /// Relabels an activity. Secondary notation: the structure is unchanged.
    Rename { node: NodeId, label: Label },
    /// Editor layout change, kept verbatim.
    Layout { payload: serde_json::Value },
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Apply { .. } => ActionKind::Apply,
            Action::Undo => ActionKind::Undo,
            Action::Rename { .. } => ActionKind::Rename,
            Action::Layout { .. } => ActionKind::Layout,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Apply,
    Undo,
    Rename,
    Layout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    PreconditionViolated,
    UnknownRef,
    WouldBreakStructure,
    NothingToUndo,
}

impl From<PatternErrorCode> for ErrorCode {
    fn from(code: PatternErrorCode) -> ErrorCode {
        match code {
            PatternErrorCode::PreconditionViolated => ErrorCode::PreconditionViolated,
            PatternErrorCode::UnknownRef => ErrorCode::UnknownRef,
            PatternErrorCode::WouldBreakStructure => ErrorCode::WouldBreakStructure,
        }
    }
}

/// `"ok"` or `{"error": CODE}` on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Error(ErrorCode),
}

impl Outcome {
    pub fn is_ok(self) -> bool {
        matches!(self, Outcome::Ok)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionEvent {
    pub seq: u64,
    pub t_ms: u64,
    pub action: Action,
    pub outcome: Outcome,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("corrupt log at event {seq}: recorded {recorded:?} but replay gives {replayed:?}")]
    CorruptLog { seq: u64, recorded: Outcome, replayed: Outcome },
    #[error("step {step} is past the end of a log with {len} events")]
    StepOutOfRange { step: usize, len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionLog {
    pub session_id: String,
    pub task_id: String,
    pub alphabet: Alphabet,
    pub events: Vec<SessionEvent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    session_id: String,
    task_id: String,
    alphabet: BTreeSet<Label>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    conditions: BTreeSet<Condition>,
}

impl SessionLog {
    pub fn new(session_id: impl Into<String>, task_id: impl Into<String>, alphabet: Alphabet) -> SessionLog {
        SessionLog { session_id: session_id.into(), task_id: task_id.into(), alphabet, events: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Header line followed by one line per event.
    pub fn to_jsonl(&self) -> String {
        let header = Header {
            format: SESSION_FORMAT.to_string(),
            version: 1,
            session_id: self.session_id.clone(),
            task_id: self.task_id.clone(),
            alphabet: self.alphabet.labels.clone(),
            conditions: self.alphabet.conditions.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses and checks ordering; does not replay.
    pub fn from_jsonl(text: &str) -> Result<SessionLog, SessionError> {
        let mut lines = text.lines().enumerate().filter(|(_, line)| !line.trim().is_empty());
        let format_error = |line: usize, message: String| SessionError::Format { line: line + 1, message };
        let (number, first) = lines.next().ok_or_else(|| format_error(0, "missing header".into()))?;
        let header: Header = serde_json::from_str(first).map_err(|e| format_error(number, e.to_string()))?;
        if header.format != SESSION_FORMAT || header.version != 1 {
            return Err(format_error(number, format!("unsupported format {} v{}", header.format, header.version)));
        }
        let alphabet = Alphabet::new(header.alphabet).with_conditions(header.conditions);
        let mut log = SessionLog::new(header.session_id, header.task_id, alphabet);
        for (number, line) in lines {
            let event: SessionEvent = serde_json::from_str(line).map_err(|e| format_error(number, e.to_string()))?;
            if let Some(last) = log.events.last() {
                if event.seq <= last.seq {
                    return Err(format_error(number, format!("seq {} after {}", event.seq, last.seq)));
                }
                if event.t_ms < last.t_ms {
                    return Err(format_error(number, format!("timestamp {} before {}", event.t_ms, last.t_ms)));
                }
            }
            log.events.push(event);
        }
        Ok(log)
    }
}

/// What an event did to the replayed state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Applied,
    /// Reverted the apply at this event index.
    Undid(usize),
    Renamed,
    Layout,
    Failed(ErrorCode),
}

struct Frame {
    event: usize,
    before: ProcessModel,
    renames: Vec<(NodeId, Label)>,
}

/// Incremental replay state.
pub struct Replayer {
    model: ProcessModel,
    frames: Vec<Frame>,
    position: usize,
}

impl Default for Replayer {
    fn default() -> Self {
        Replayer::new()
    }
}

impl Replayer {
    pub fn new() -> Replayer {
        Replayer { model: ProcessModel::new_empty(), frames: Vec::new(), position: 0 }
    }

    pub fn model(&self) -> &ProcessModel {
        &self.model
    }

    /// Event indices of the applies an undo would revert, most recent last.
    pub fn undoable(&self) -> impl Iterator<Item = usize> + '_ {
        self.frames.iter().map(|frame| frame.event)
    }

    /// Performs `action` as the next event.
    pub fn step(&mut self, action: &Action) -> Effect {
        let index = self.position;
        self.position += 1;
        match action {
            Action::Apply { pattern } => match apply_pattern(&self.model, pattern) {
                Ok(next) => {
                    let before = std::mem::replace(&mut self.model, next);
                    self.frames.push(Frame { event: index, before, renames: Vec::new() });
                    Effect::Applied
                }
                Err(error) => Effect::Failed(error.code.into()),
            },
            Action::Undo => {
                let Some(frame) = self.frames.pop() else { return Effect::Failed(ErrorCode::NothingToUndo) };
                let issued = self.model.next_id();
                self.model = frame.before;
                self.model.reserve_ids(issued);
                for (node, label) in &frame.renames {
                    // Nodes created by the reverted apply are gone again.
                    let _ = rename(&mut self.model, *node, label);
                }
                if let Some(below) = self.frames.last_mut() {
                    below.renames.extend(frame.renames);
                }
                Effect::Undid(frame.event)
            }
            Action::Rename { node, label } => match rename(&mut self.model, *node, label) {
                Ok(()) => {
                    if let Some(top) = self.frames.last_mut() {
                        top.renames.push((*node, label.clone()));
                    }
                    Effect::Renamed
                }
                Err(code) => Effect::Failed(code),
            },
            Action::Layout { .. } => Effect::Layout,
        }
    }
}

fn rename(model: &mut ProcessModel, node: NodeId, label: &Label) -> Result<(), ErrorCode> {
    let target = model.node_mut(node).ok_or(ErrorCode::UnknownRef)?;
    match target.kind {
        NodeKind::Activity(_) => {
            target.kind = NodeKind::Activity(label.clone());
            Ok(())
        }
        _ => Err(ErrorCode::PreconditionViolated),
    }
}

impl Effect {
    pub fn outcome(&self) -> Outcome {
        match self {
            Effect::Failed(code) => Outcome::Error(*code),
            _ => Outcome::Ok,
        }
    }
}

/// Model after the first `step` events; `replay(log, 0)` is the empty model.
pub fn replay(log: &SessionLog, step: usize) -> Result<ProcessModel, SessionError> {
    if step > log.events.len() {
        return Err(SessionError::StepOutOfRange { step, len: log.events.len() });
    }
    let mut replayer = Replayer::new();
    for event in &log.events[..step] {
        checked_step(&mut replayer, event)?;
    }
    Ok(replayer.model)
}

/// Every prefix state: entry `k` is the model after `k` events.
pub fn replay_states(log: &SessionLog) -> Result<Vec<ProcessModel>, SessionError> {
    Ok(replay_effects(log)?.0)
}

/// Prefix states plus the effect of each event.
pub fn replay_effects(log: &SessionLog) -> Result<(Vec<ProcessModel>, Vec<Effect>), SessionError> {
    let mut replayer = Replayer::new();
    let mut states = vec![replayer.model.clone()];
    let mut effects = Vec::with_capacity(log.events.len());
    for event in &log.events {
        effects.push(checked_step(&mut replayer, event)?);
        states.push(replayer.model.clone());
    }
    Ok((states, effects))
}

fn checked_step(replayer: &mut Replayer, event: &SessionEvent) -> Result<Effect, SessionError> {
    let effect = replayer.step(&event.action);
    if effect.outcome() != event.outcome {
        return Err(SessionError::CorruptLog { seq: event.seq, recorded: event.outcome, replayed: effect.outcome() });
    }
    Ok(effect)
}

/// A live session: the log plus the replayed current state.
pub struct Session {
    log: SessionLog,
    replayer: Replayer,
}

impl Session {
    pub fn new(log: SessionLog) -> Result<Session, SessionError> {
        let mut replayer = Replayer::new();
        for event in &log.events {
            checked_step(&mut replayer, event)?;
        }
        Ok(Session { log, replayer })
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn into_log(self) -> SessionLog {
        self.log
    }

    pub fn model(&self) -> &ProcessModel {
        self.replayer.model()
    }

    /// Appends `action` with its outcome. Failures are recorded and leave the
    /// state unchanged. Timestamps earlier than the last event are raised to
    /// it so that the log stays ordered.
    pub fn record(&mut self, action: Action, t_ms: u64) -> &SessionEvent {
        let effect = self.replayer.step(&action);
        let seq = self.log.events.last().map_or(0, |event| event.seq + 1);
        let t_ms = self.log.events.last().map_or(t_ms, |event| t_ms.max(event.t_ms));
        self.log.events.push(SessionEvent { seq, t_ms, action, outcome: effect.outcome() });
        self.log.events.last().expect("just pushed")
    }
}

/// Appends `action` to `log`, replaying it first to find the current state.
pub fn record(log: SessionLog, action: Action, t_ms: u64) -> Result<SessionLog, SessionError> {
    let mut session = Session::new(log)?;
    session.record(action, t_ms);
    Ok(session.into_log())
}
