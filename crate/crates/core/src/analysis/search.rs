//! Minimal pattern distance by layered breadth-first search under a cost
//! bound, raised until the target is found.
//!
//! States are deduplicated by canonical key. A state at depth `g` is kept
//! only while `g + estimate <= bound`; since the estimate never exceeds the
//! true remaining distance, every optimal path survives the cut.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{canonical_key, canonical_order, digest_of, Digest, NodeId, ProcessModel};
use crate::patterns::{applicable_where, apply_pattern, apply_validated, constructible, Alphabet, PatternInstance};

use super::features::{Goal, Layout, Profile};
use super::AnalysisError;

/// Default cap on enumerated optimal paths.
pub const DEFAULT_ENUMERATE_LIMIT: usize = 10_000;
/// Default cap on stored search states.
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceOptions {
    pub enumerate_limit: usize,
    pub state_budget: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { enumerate_limit: DEFAULT_ENUMERATE_LIMIT, state_budget: DEFAULT_STATE_BUDGET }
    }
}

/// Optimal paths between two models. Paths refer to node ids of the source
/// model and of the models produced along the way.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceResult {
    pub d: usize,
    pub optimal_paths: Vec<Vec<PatternInstance>>,
    /// More optimal paths exist than were listed.
    pub truncated: bool,
    /// Number of optimal paths, saturating.
    pub path_count: u64,
    pub explored_states: usize,
    pub dag: PathDag,
}

impl DistanceResult {
    pub fn paths(&self) -> impl Iterator<Item = &[PatternInstance]> {
        self.optimal_paths.iter().map(Vec::as_slice)
    }
}

/// Every optimal path as a DAG over canonical states. Edge patterns refer
/// to ids of the representative model of their `from` state, which is the
/// source for state 0.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PathDag {
    pub states: Vec<DagState>,
    pub edges: Vec<DagEdge>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DagState {
    pub digest: Digest,
    pub depth: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub pattern: PatternInstance,
}

/// Streams the listed optimal paths in their deterministic order.
pub fn optimal_paths(result: &DistanceResult) -> impl Iterator<Item = &[PatternInstance]> {
    result.paths()
}

/// Which moves a search may use.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Moves {
    All,
    NoDelete,
}

struct Record {
    depth: u32,
    /// `(predecessor, pattern on the predecessor's representative)`; the
    /// first entry defines this state's representative.
    preds: Vec<(u32, PatternInstance)>,
}

enum Outcome {
    Found { records: Vec<Record>, target: u32 },
    Exhausted { next_bound: Option<usize> },
}

pub(crate) struct Problem {
    goal: Goal,
    target_key: String,
    alphabet: Alphabet,
    budget: usize,
    pub(crate) explored: usize,
}

impl Problem {
    pub(crate) fn new(target: &ProcessModel, alphabet: &Alphabet, budget: usize) -> Result<Problem, AnalysisError> {
        let missing: Vec<_> = target.activities().into_iter().filter(|label| !alphabet.labels.contains(label)).collect();
        if !missing.is_empty() {
            return Err(AnalysisError::AlphabetMissing(missing));
        }
        if !constructible(target) {
            return Err(AnalysisError::Unreachable("conditionals with more than two filled branches".into()));
        }
        Ok(Problem {
            goal: Goal::new(target),
            target_key: canonical_key(target),
            alphabet: alphabet.clone().union(&Alphabet::of_model(target)),
            budget,
            explored: 0,
        })
    }

    pub(crate) fn is_target(&self, model: &ProcessModel) -> bool {
        canonical_key(model) == self.target_key
    }

    pub(crate) fn lower_bound(&self, model: &ProcessModel) -> usize {
        self.goal.estimate(&Profile::of(model)).bound
    }

    /// Moves worth trying from `model`, and the smallest overshoot among the
    /// moves left out: one for moves that cannot lower the bound, two for
    /// conflicting inserts.
    fn moves(
        &self,
        model: &ProcessModel,
        profile: &Profile,
        slack: Option<usize>,
        moves: Moves,
    ) -> (Vec<PatternInstance>, Option<usize>) {
        let estimate = self.goal.estimate(profile);
        let screen = !estimate.needs_delete && (moves == Moves::NoDelete || slack.is_some_and(|slack| slack < 2));
        let layout = screen.then(|| Layout::of(model));
        let skipped = std::cell::Cell::new(None::<usize>);
        let skip = |overshoot: usize| skipped.set(Some(skipped.get().map_or(overshoot, |o| o.min(overshoot))));
        let found = applicable_where(model, Some(&self.alphabet), |pattern| {
            if moves == Moves::NoDelete && matches!(pattern, PatternInstance::DeleteFragment { .. }) {
                return false;
            }
            if slack == Some(0) && !self.goal.may_progress(profile, &estimate, pattern) {
                skip(1);
                return false;
            }
            if layout.as_ref().is_some_and(|layout| self.goal.insert_conflicts(profile, layout, pattern)) {
                skip(2);
                return false;
            }
            true
        });
        (found, skipped.get())
    }

    fn over_budget(&self, bound: usize) -> Option<AnalysisError> {
        (self.explored > self.budget).then(|| AnalysisError::BudgetExceeded {
            lower: bound,
            upper: None,
            explored: self.explored,
        })
    }

    /// One layered search with cost bound `bound`.
    fn layered(&mut self, source: &ProcessModel, bound: usize) -> Result<Outcome, AnalysisError> {
        let mut records = vec![Record { depth: 0, preds: Vec::new() }];
        let mut seen: HashMap<Box<str>, u32> = HashMap::from([(canonical_key(source).into_boxed_str(), 0)]);
        self.explored += 1;
        if self.is_target(source) {
            return Ok(Outcome::Found { records, target: 0 });
        }
        let mut layer: Vec<(u32, ProcessModel, Profile)> = vec![(0, source.clone(), Profile::of(source))];
        let mut next_bound: Option<usize> = None;
        let mut depth = 0;
        while !layer.is_empty() {
            let mut next = Vec::new();
            let mut found = None;
            for (index, model, profile) in &layer {
                let h = self.goal.estimate(profile).bound;
                let slack = bound.checked_sub(depth + h);
                let (moves, skipped) = self.moves(model, profile, slack, Moves::All);
                if let Some(overshoot) = skipped {
                    let cost = depth + h + overshoot;
                    next_bound = Some(next_bound.map_or(cost, |b: usize| b.min(cost)));
                }
                for pattern in moves {
                    let after = apply_validated(model, &pattern);
                    // Stored states all fit the bound, so a state over it is new.
                    let profile = Profile::of(&after);
                    let cost = depth + 1 + self.goal.estimate(&profile).bound;
                    if cost > bound {
                        next_bound = Some(next_bound.map_or(cost, |b: usize| b.min(cost)));
                        continue;
                    }
                    let key = canonical_key(&after);
                    if let Some(&known) = seen.get(key.as_str()) {
                        if records[known as usize].depth as usize == depth + 1 {
                            records[known as usize].preds.push((*index, pattern));
                        }
                        continue;
                    }
                    let id = records.len() as u32;
                    records.push(Record { depth: depth as u32 + 1, preds: vec![(*index, pattern)] });
                    self.explored += 1;
                    if let Some(error) = self.over_budget(bound) {
                        return Err(error);
                    }
                    if *key == self.target_key {
                        found = Some(id);
                    }
                    seen.insert(key.into_boxed_str(), id);
                    next.push((id, after, profile));
                }
            }
            if let Some(target) = found {
                return Ok(Outcome::Found { records, target });
            }
            layer = next;
            depth += 1;
        }
        Ok(Outcome::Exhausted { next_bound })
    }

    /// Raises the bound until the target shows up or `limit` is passed.
    fn deepen(&mut self, source: &ProcessModel, limit: Option<usize>) -> Result<Option<(Vec<Record>, u32)>, AnalysisError> {
        let mut bound = self.lower_bound(source);
        loop {
            if limit.is_some_and(|limit| bound > limit) {
                return Ok(None);
            }
            match self.layered(source, bound)? {
                Outcome::Found { records, target } => return Ok(Some((records, target))),
                Outcome::Exhausted { next_bound: Some(next) } => bound = next,
                Outcome::Exhausted { next_bound: None } => {
                    return Err(AnalysisError::Unreachable("search space exhausted".into()));
                }
            }
        }
    }
}

/// Minimal number of patterns turning `source` into a model canonically
/// equal to `target`, with optimal paths.
///
/// Insert labels come from `alphabet`, which must contain every label of
/// `target`; update values from the alphabet's and both models' conditions.
pub fn distance(
    source: &ProcessModel,
    target: &ProcessModel,
    alphabet: &Alphabet,
    options: &DistanceOptions,
) -> Result<DistanceResult, AnalysisError> {
    let mut problem = Problem::new(target, alphabet, options.state_budget)?;
    let found = problem.deepen(source, None).map_err(|error| with_upper(error, source, target))?;
    let (records, target_id) = found.expect("unbounded search finds the target or fails");
    let d = records[target_id as usize].depth as usize;
    let (dag, optimal_paths, path_count) = collect_paths(source, &records, target_id, options.enumerate_limit);
    Ok(DistanceResult {
        d,
        truncated: path_count > optimal_paths.len() as u64,
        optimal_paths,
        path_count,
        explored_states: problem.explored,
        dag,
    })
}

/// The distance if it is at most `limit`, else `None`.
pub fn distance_within(
    source: &ProcessModel,
    target: &ProcessModel,
    alphabet: &Alphabet,
    limit: usize,
    options: &DistanceOptions,
) -> Result<Option<usize>, AnalysisError> {
    let mut problem = Problem::new(target, alphabet, options.state_budget)?;
    let found = problem.deepen(source, Some(limit)).map_err(|error| with_upper(error, source, target))?;
    Ok(found.map(|(records, target)| records[target as usize].depth as usize))
}

fn with_upper(error: AnalysisError, source: &ProcessModel, target: &ProcessModel) -> AnalysisError {
    match error {
        AnalysisError::BudgetExceeded { lower, explored, .. } => AnalysisError::BudgetExceeded {
            lower,
            upper: crate::patterns::build_steps(source, target).ok().map(|steps| steps.len()),
            explored,
        },
        other => other,
    }
}

fn collect_paths(
    source: &ProcessModel,
    records: &[Record],
    target: u32,
    limit: usize,
) -> (PathDag, Vec<Vec<PatternInstance>>, u64) {
    // States on some optimal path: everything backwards from the target.
    let mut useful = vec![false; records.len()];
    let mut stack = vec![target];
    useful[target as usize] = true;
    while let Some(state) = stack.pop() {
        for &(pred, _) in &records[state as usize].preds {
            if !useful[pred as usize] {
                useful[pred as usize] = true;
                stack.push(pred);
            }
        }
    }
    let mut children: HashMap<u32, Vec<(&PatternInstance, u32)>> = HashMap::new();
    for (state, record) in records.iter().enumerate().filter(|(state, _)| useful[*state]) {
        for (pred, pattern) in &record.preds {
            children.entry(*pred).or_default().push((pattern, state as u32));
        }
    }
    for list in children.values_mut() {
        list.sort();
    }

    // Path counts, deepest states first.
    let mut order: Vec<u32> = (0..records.len() as u32).filter(|&s| useful[s as usize]).collect();
    order.sort_by_key(|&s| Reverse(records[s as usize].depth));
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for &state in &order {
        let count = if state == target {
            1
        } else {
            children.get(&state).into_iter().flatten().fold(0u64, |sum, (_, child)| sum.saturating_add(counts[child]))
        };
        counts.insert(state, count);
    }

    // Representatives replay the first predecessor chain.
    let mut reps: HashMap<u32, ProcessModel> = HashMap::from([(0, source.clone())]);
    let mut by_depth = order.clone();
    by_depth.reverse();
    for &state in &by_depth {
        if state != 0 {
            let (pred, pattern) = &records[state as usize].preds[0];
            let model = apply_pattern(&reps[pred], pattern).expect("recorded moves apply");
            reps.insert(state, model);
        }
    }

    let mut dag = PathDag::default();
    let mut numbering: HashMap<u32, usize> = HashMap::new();
    let mut by_order = by_depth.clone();
    by_order.sort_by_key(|&s| (records[s as usize].depth, s));
    for &state in &by_order {
        numbering.insert(state, dag.states.len());
        dag.states.push(DagState {
            digest: digest_of(&canonical_key(&reps[&state])),
            depth: records[state as usize].depth as usize,
        });
    }
    for &state in &by_order {
        for (pattern, child) in children.get(&state).into_iter().flatten() {
            dag.edges.push(DagEdge { from: numbering[&state], to: numbering[child], pattern: (*pattern).clone() });
        }
    }

    let mut paths = Vec::new();
    let mut walk = PathWalk { children: &children, reps: &reps, target, limit, prefix: Vec::new(), paths: &mut paths };
    walk.visit(0, source.clone());
    (dag, paths, counts[&0])
}

struct PathWalk<'a> {
    children: &'a HashMap<u32, Vec<(&'a PatternInstance, u32)>>,
    reps: &'a HashMap<u32, ProcessModel>,
    target: u32,
    limit: usize,
    prefix: Vec<PatternInstance>,
    paths: &'a mut Vec<Vec<PatternInstance>>,
}

impl PathWalk<'_> {
    /// `actual` is canonically equal to the representative of `state` but
    /// carries the ids produced by replaying `prefix` on the source.
    fn visit(&mut self, state: u32, actual: ProcessModel) {
        if self.paths.len() >= self.limit {
            return;
        }
        if state == self.target {
            self.paths.push(self.prefix.clone());
            return;
        }
        let Some(children) = self.children.get(&state) else { return };
        let translate = id_translation(&self.reps[&state], &actual);
        for (pattern, child) in children {
            let pattern = pattern.map_refs(&translate);
            let next = apply_pattern(&actual, &pattern).expect("translated moves apply");
            self.prefix.push(pattern);
            self.visit(*child, next);
            self.prefix.pop();
            if self.paths.len() >= self.limit {
                return;
            }
        }
    }
}

/// Maps ids of `from` to the structurally corresponding ids of `to`; the two
/// models must be canonically equal.
pub(crate) fn id_translation(from: &ProcessModel, to: &ProcessModel) -> impl Fn(NodeId) -> NodeId {
    let from_order = canonical_order(from);
    let to_order = canonical_order(to);
    let map: HashMap<NodeId, NodeId> = from_order.into_iter().zip(to_order).collect();
    move |id| map.get(&id).copied().unwrap_or(id)
}

/// Best-first search without deletes, exhaustive within the target's size.
/// Returns a witness path on the actual ids of `source` if the target is
/// reachable.
///
/// Guards are left out of the search: any guard can be rewritten at any
/// time, so the search only needs to reach the target's structure and the
/// witness ends with the updates that fix the guards.
pub(crate) fn reach_without_delete(
    source: &ProcessModel,
    target: &ProcessModel,
    problem: &mut Problem,
) -> Option<Vec<PatternInstance>> {
    let limit = Profile::of(target).size;
    let start = Profile::of(source);
    if start.size > limit || problem.goal.estimate(&start).needs_delete {
        return None;
    }
    let shape = canonical_key(&target.without_conditions());
    let mut parents: Vec<Option<(usize, PatternInstance)>> = vec![None];
    let mut models = vec![source.clone()];
    let first = canonical_key(&source.without_conditions());
    if first == shape {
        return Some(fix_guards(source, target, Vec::new()));
    }
    let mut seen: HashMap<Box<str>, usize> = HashMap::from([(first.into_boxed_str(), 0)]);
    let mut queue = BinaryHeap::from([(Reverse((problem.goal.estimate(&start).bound, 0usize)), 0usize)]);
    while let Some((Reverse((_, depth)), index)) = queue.pop() {
        let model = models[index].clone();
        let profile = Profile::of(&model);
        for pattern in problem.moves(&model, &profile, None, Moves::NoDelete).0 {
            if matches!(pattern, PatternInstance::UpdateCondition { .. }) {
                continue;
            }
            let after = apply_validated(&model, &pattern);
            let key = canonical_key(&after.without_conditions());
            if seen.contains_key(key.as_str()) {
                continue;
            }
            let after_profile = Profile::of(&after);
            let estimate = problem.goal.estimate(&after_profile);
            if after_profile.size > limit || estimate.needs_delete {
                continue;
            }
            let id = models.len();
            seen.insert(key.clone().into_boxed_str(), id);
            parents.push(Some((index, pattern)));
            problem.explored += 1;
            if key == shape {
                return Some(fix_guards(&after, target, witness(&parents, id)));
            }
            models.push(after);
            queue.push((Reverse((depth + 1 + estimate.bound, depth + 1)), id));
        }
    }
    None
}

/// Appends to `steps` the updates turning the guards of `reached`, which has
/// the target's structure, into the target's.
fn fix_guards(reached: &ProcessModel, target: &ProcessModel, mut steps: Vec<PatternInstance>) -> Vec<PatternInstance> {
    let pairs = canonical_order(&reached.without_conditions())
        .into_iter()
        .zip(canonical_order(&target.without_conditions()));
    for (mine, theirs) in pairs {
        let wanted = target.node(theirs).and_then(|node| node.condition.clone());
        let current = reached.node(mine).and_then(|node| node.condition.clone());
        if let (Some(wanted), Some(current)) = (wanted, current) {
            if wanted != current {
                steps.push(PatternInstance::UpdateCondition { edge: mine, condition: wanted });
            }
        }
    }
    steps
}

/// Steps along the parent chain. Every stored model was produced from its
/// parent's stored model, so the ids line up without translation.
fn witness(parents: &[Option<(usize, PatternInstance)>], last: usize) -> Vec<PatternInstance> {
    let mut steps = Vec::new();
    let mut at = last;
    while let Some((parent, pattern)) = &parents[at] {
        steps.push(pattern.clone());
        at = *parent;
    }
    steps.reverse();
    steps
}
