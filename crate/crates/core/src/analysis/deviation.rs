//! Process and product deviations of a recorded session.
//!
//! Process deviations are the operations a session took beyond the minimal
//! number needed for the model it actually ended with. A step is on an
//! optimal path when it brings the remaining distance to that final model to
//! a new low; every other counted step is a detour.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{canonical_key, Label, NodeId, ProcessModel};
use crate::patterns::{Alphabet, PatternInstance};
use crate::session::{replay_effects, Action, Effect, SessionLog};

use super::regions::{map_to_regions, RegionMap};
use super::search::{distance, distance_within, DistanceOptions};
use super::{dead_end, AnalysisError};

/// Whether failed applications count as operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CountingMode {
    #[default]
    StateChangingOnly,
    IncludeFailed,
}

/// How a reverted apply and its undo are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UndoCounting {
    /// Neither counts.
    Net,
    /// The apply counts, the undo does not.
    Once,
    /// Both count, like an explicit delete would.
    #[default]
    Twice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationOptions {
    pub mode: CountingMode,
    pub undo: UndoCounting,
    pub distance: DistanceOptions,
}

impl Default for DeviationOptions {
    fn default() -> Self {
        DeviationOptions {
            mode: CountingMode::default(),
            undo: UndoCounting::default(),
            distance: DistanceOptions { enumerate_limit: 1, ..DistanceOptions::default() },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepMarker {
    OnOptimalPath,
    Detour,
    FailedTrial,
}

/// Marker for one apply or undo event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Index into the log's events.
    pub event: usize,
    pub seq: u64,
    pub marker: StepMarker,
    /// Whether the step counts as an operation under the chosen options.
    pub counted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProcessDeviations {
    pub count: usize,
    pub counted_operations: usize,
    /// Minimal number of patterns for the final model.
    pub minimal_operations: usize,
    pub failed_trials: usize,
    pub steps: Vec<StepRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductDeviations {
    pub count: usize,
    /// One optimal correction path, on the ids of the final model.
    pub witness: Vec<PatternInstance>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub process: usize,
    pub product: usize,
}

/// Full analysis of one session. Field order is stable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationReport {
    pub session_id: String,
    pub task_id: String,
    pub mode: CountingMode,
    pub undo: UndoCounting,
    pub process_deviations: usize,
    pub product_deviations: usize,
    pub counted_operations: usize,
    pub minimal_operations: usize,
    pub failed_trials: usize,
    pub per_step: Vec<StepRecord>,
    pub dead_end_steps: Vec<usize>,
    pub per_region: BTreeMap<String, RegionCounts>,
    pub product_witness: Vec<PatternInstance>,
    /// Free-form reasons per event index, filled in by people.
    pub reason_tags: BTreeMap<usize, String>,
}

impl DeviationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Prefix states with every activity already carrying the label later renames
/// give it, so states compare against the final model by structure.
pub(crate) fn projected_states(log: &SessionLog, states: &[ProcessModel], effects: &[Effect]) -> Vec<ProcessModel> {
    let mut last: HashMap<NodeId, (usize, Label)> = HashMap::new();
    for (index, (event, effect)) in log.events.iter().zip(effects).enumerate() {
        if let (Action::Rename { node, label }, Effect::Renamed) = (&event.action, effect) {
            last.insert(*node, (index, label.clone()));
        }
    }
    states
        .iter()
        .enumerate()
        .map(|(k, state)| {
            let mut state = state.clone();
            state.relabel(&|id| last.get(&id).filter(|(index, _)| *index >= k).map(|(_, label)| label.clone()));
            state
        })
        .collect()
}

/// Labels a pattern works on in `model`: the label an insert adds, or every
/// label in the fragment the pattern changes.
pub(crate) fn touched_labels(model: &ProcessModel, pattern: &PatternInstance) -> BTreeSet<Label> {
    let mut out: BTreeSet<Label> = pattern.inserted_label().cloned().into_iter().collect();
    let fragment = match pattern {
        PatternInstance::SerialInsert { .. } | PatternInstance::ParallelInsert { .. } => None,
        PatternInstance::DeleteFragment { target }
        | PatternInstance::EmbedInLoop { target, .. }
        | PatternInstance::EmbedInConditional { target, .. } => Some(*target),
        PatternInstance::UpdateCondition { edge, .. } => Some(*edge),
    };
    if let Some(node) = fragment.and_then(|id| model.node(id)) {
        out.extend(node.labels());
    }
    out
}

struct Replayed {
    states: Vec<ProcessModel>,
    effects: Vec<Effect>,
    alphabet: Alphabet,
}

impl Replayed {
    fn new(log: &SessionLog) -> Result<Replayed, AnalysisError> {
        let (states, effects) = replay_effects(log)?;
        let states = projected_states(log, &states, &effects);
        let last = states.last().expect("at least the empty state");
        let alphabet = log.alphabet.clone().union(&Alphabet::of_model(last));
        Ok(Replayed { states, effects, alphabet })
    }

    fn last(&self) -> &ProcessModel {
        self.states.last().expect("at least the empty state")
    }
}

/// Process deviations of `log` relative to its own final model.
pub fn process_deviations(log: &SessionLog, options: &DeviationOptions) -> Result<ProcessDeviations, AnalysisError> {
    process_of(log, &Replayed::new(log)?, options)
}

fn process_of(log: &SessionLog, replayed: &Replayed, options: &DeviationOptions) -> Result<ProcessDeviations, AnalysisError> {
    let last = replayed.last();
    let empty = ProcessModel::new_empty();
    let minimal = distance(&empty, last, &replayed.alphabet, &options.distance)?.d;
    let undone: HashSet<usize> = replayed
        .effects
        .iter()
        .filter_map(|effect| match effect {
            Effect::Undid(index) => Some(*index),
            _ => None,
        })
        .collect();

    let mut record = minimal;
    let mut steps = Vec::new();
    let mut failed_trials = 0;
    for (index, (event, effect)) in log.events.iter().zip(&replayed.effects).enumerate() {
        let counted = match (effect, &event.action) {
            (Effect::Applied, _) => options.undo != UndoCounting::Net || !undone.contains(&index),
            (Effect::Undid(_), _) => options.undo == UndoCounting::Twice,
            (Effect::Failed(_), Action::Apply { .. } | Action::Undo) => {
                failed_trials += 1;
                steps.push(StepRecord {
                    event: index,
                    seq: event.seq,
                    marker: StepMarker::FailedTrial,
                    counted: options.mode == CountingMode::IncludeFailed,
                });
                continue;
            }
            _ => continue,
        };
        let mut marker = StepMarker::Detour;
        if counted && record > 0 {
            let state = &replayed.states[index + 1];
            if distance_within(state, last, &replayed.alphabet, record - 1, &options.distance)?.is_some() {
                marker = StepMarker::OnOptimalPath;
                record -= 1;
            }
        }
        steps.push(StepRecord { event: index, seq: event.seq, marker, counted });
    }
    let counted_operations = steps.iter().filter(|step| step.counted).count();
    let count = counted_operations - minimal;
    debug_assert_eq!(count, steps.iter().filter(|s| s.counted && s.marker != StepMarker::OnOptimalPath).count());
    Ok(ProcessDeviations { count, counted_operations, minimal_operations: minimal, failed_trials, steps })
}

/// Pattern distance from `final_model` to `solution` with a witness path.
pub fn product_deviations(
    final_model: &ProcessModel,
    solution: &ProcessModel,
    alphabet: &Alphabet,
    options: &DistanceOptions,
) -> Result<ProductDeviations, AnalysisError> {
    let alphabet = alphabet.clone().union(&Alphabet::of_model(solution));
    let options = DistanceOptions { enumerate_limit: 1, ..*options };
    let result = distance(final_model, solution, &alphabet, &options)?;
    Ok(ProductDeviations { count: result.d, witness: result.optimal_paths.into_iter().next().unwrap_or_default() })
}

/// Process and product deviations, dead-end prefixes and, with `regions`,
/// per-region totals.
pub fn analyze_session(
    log: &SessionLog,
    solution: &ProcessModel,
    regions: Option<&RegionMap>,
    options: &DeviationOptions,
) -> Result<DeviationReport, AnalysisError> {
    let replayed = Replayed::new(log)?;
    let process = process_of(log, &replayed, options)?;
    let product = product_deviations(replayed.last(), solution, &replayed.alphabet, &options.distance)?;

    let alphabet = replayed.alphabet.clone().union(&Alphabet::of_model(solution));
    let mut verdicts: HashMap<String, bool> = HashMap::new();
    let mut dead_end_steps = Vec::new();
    for (index, effect) in replayed.effects.iter().enumerate() {
        if !matches!(effect, Effect::Applied | Effect::Undid(_)) {
            continue;
        }
        let state = &replayed.states[index + 1];
        let key = canonical_key(state);
        let dead = match verdicts.get(&key) {
            Some(dead) => *dead,
            None => {
                let dead = dead_end(state, solution, &alphabet)?.is_dead_end;
                verdicts.insert(key, dead);
                dead
            }
        };
        if dead {
            dead_end_steps.push(index);
        }
    }

    let report = DeviationReport {
        session_id: log.session_id.clone(),
        task_id: log.task_id.clone(),
        mode: options.mode,
        undo: options.undo,
        process_deviations: process.count,
        product_deviations: product.count,
        counted_operations: process.counted_operations,
        minimal_operations: process.minimal_operations,
        failed_trials: process.failed_trials,
        per_step: process.steps,
        dead_end_steps,
        per_region: BTreeMap::new(),
        product_witness: product.witness,
        reason_tags: BTreeMap::new(),
    };
    match regions {
        Some(regions) => map_to_regions(report, log, solution, regions),
        None => Ok(report),
    }
}
