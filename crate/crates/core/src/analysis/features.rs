//! Structural features that bound the remaining pattern count from below.
//!
//! Patterns never change how two existing activities relate (which one comes
//! first in a sequence, parallel, exclusive) and never take an activity out of
//! a loop. An activity that relates wrongly to another one, or sits in too many
//! loops, has to be deleted and inserted again. Gateways of a kind the target
//! has fewer of can only go away through a delete as well.

use std::collections::HashMap;

use crate::model::{BlockNode, Condition, Label, NodeId, NodeKind, ProcessModel};
use crate::patterns::{PatternInstance, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Relation {
    Before,
    After,
    Parallel,
    Exclusive,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ancestor {
    Sequence,
    Parallel,
    Conditional,
    Loop,
}

struct Placement {
    /// (ancestor kind, index of the child taken) from the root down.
    path: Vec<(Ancestor, u32)>,
    loops: u32,
}

fn relation(a: &Placement, b: &Placement) -> Relation {
    let (split, other) = a
        .path
        .iter()
        .zip(&b.path)
        .find(|(x, y)| x.1 != y.1)
        .expect("distinct leaves diverge somewhere");
    match split.0 {
        Ancestor::Sequence if split.1 < other.1 => Relation::Before,
        Ancestor::Sequence => Relation::After,
        Ancestor::Parallel => Relation::Parallel,
        Ancestor::Conditional | Ancestor::Loop => Relation::Exclusive,
    }
}

/// Label and gateway statistics of one model.
pub(crate) struct Profile {
    counts: HashMap<Label, u32>,
    /// Placement of labels that occur exactly once.
    unique: HashMap<Label, Placement>,
    conditions: HashMap<Condition, u32>,
    parallel: u32,
    conditional: u32,
    loops: u32,
    pub(crate) size: usize,
}

impl Profile {
    pub(crate) fn of(model: &ProcessModel) -> Profile {
        let mut profile = Profile {
            counts: HashMap::new(),
            unique: HashMap::new(),
            conditions: HashMap::new(),
            parallel: 0,
            conditional: 0,
            loops: 0,
            size: 0,
        };
        let mut placements = Vec::new();
        let mut path = Vec::new();
        profile.visit(model.root(), &mut path, 0, &mut placements);
        for (label, placement) in placements {
            if profile.counts[&label] == 1 {
                profile.unique.insert(label, placement);
            }
        }
        profile
    }

    fn visit(
        &mut self,
        node: &BlockNode,
        path: &mut Vec<(Ancestor, u32)>,
        loops: u32,
        out: &mut Vec<(Label, Placement)>,
    ) {
        self.size += 1;
        if let Some(Condition::Expr(text)) = &node.condition {
            *self.conditions.entry(Condition::Expr(text.clone())).or_insert(0) += 1;
        }
        let ancestor = match &node.kind {
            NodeKind::Activity(label) => {
                *self.counts.entry(label.clone()).or_insert(0) += 1;
                out.push((label.clone(), Placement { path: path.clone(), loops }));
                return;
            }
            NodeKind::Skip => return,
            NodeKind::Sequence => Ancestor::Sequence,
            NodeKind::Parallel => {
                self.parallel += 1;
                Ancestor::Parallel
            }
            NodeKind::Conditional => {
                self.conditional += 1;
                Ancestor::Conditional
            }
            NodeKind::Loop => {
                self.loops += 1;
                Ancestor::Loop
            }
        };
        let loops = loops + u32::from(ancestor == Ancestor::Loop);
        for (index, child) in node.children.iter().enumerate() {
            path.push((ancestor, index as u32));
            self.visit(child, path, loops, out);
            path.pop();
        }
    }

    fn count(&self, label: &Label) -> u32 {
        self.counts.get(label).copied().unwrap_or(0)
    }
}

/// Root paths of every node of a model, for placing inserts before they
/// happen.
pub(crate) struct Layout {
    paths: HashMap<NodeId, Vec<(Ancestor, u32)>>,
}

impl Layout {
    pub(crate) fn of(model: &ProcessModel) -> Layout {
        fn visit(node: &BlockNode, path: &mut Vec<(Ancestor, u32)>, out: &mut HashMap<NodeId, Vec<(Ancestor, u32)>>) {
            out.insert(node.id, path.clone());
            let ancestor = match node.kind {
                NodeKind::Sequence => Ancestor::Sequence,
                NodeKind::Parallel => Ancestor::Parallel,
                NodeKind::Conditional => Ancestor::Conditional,
                NodeKind::Loop => Ancestor::Loop,
                NodeKind::Activity(_) | NodeKind::Skip => return,
            };
            for (index, child) in node.children.iter().enumerate() {
                path.push((ancestor, index as u32));
                visit(child, path, out);
                path.pop();
            }
        }
        let mut paths = HashMap::new();
        visit(model.root(), &mut Vec::new(), &mut paths);
        Layout { paths }
    }
}

/// Relation of an activity inserted at `anchor` to the existing activity at
/// `other`. `inside` is the relation when `other` lies within the anchor
/// node, given the index of the anchor's child holding it.
fn inserted_relation(anchor: &[(Ancestor, u32)], inside: impl Fn(u32) -> Relation, other: &Placement) -> Relation {
    if other.path.len() >= anchor.len() && other.path[..anchor.len()] == *anchor {
        // The anchor may be the activity itself.
        return inside(other.path.get(anchor.len()).map_or(0, |step| step.1));
    }
    let (mine, theirs) = anchor
        .iter()
        .zip(&other.path)
        .find(|(x, y)| x.1 != y.1)
        .expect("an activity outside the anchor diverges from it");
    match mine.0 {
        Ancestor::Sequence if mine.1 < theirs.1 => Relation::Before,
        Ancestor::Sequence => Relation::After,
        Ancestor::Parallel => Relation::Parallel,
        Ancestor::Conditional | Ancestor::Loop => Relation::Exclusive,
    }
}

/// How far a state is from the target, in terms the move filter can use.
pub(crate) struct Estimate {
    /// Lower bound on the number of patterns still needed.
    pub(crate) bound: usize,
    /// Some part of the state can only be removed by a delete.
    pub(crate) needs_delete: bool,
}

/// Target-side data for estimates.
pub(crate) struct Goal {
    pub(crate) profile: Profile,
}

impl Goal {
    pub(crate) fn new(target: &ProcessModel) -> Goal {
        Goal { profile: Profile::of(target) }
    }

    pub(crate) fn estimate(&self, state: &Profile) -> Estimate {
        let goal = &self.profile;
        let mut missing = 0;
        let mut surplus = false;
        for (label, &wanted) in &goal.counts {
            missing += wanted.saturating_sub(state.count(label)) as usize;
        }
        for (label, &have) in &state.counts {
            surplus |= have > goal.count(label);
        }

        // Activities present once on both sides must keep their relations.
        let mut shared: Vec<(&Label, &Placement, &Placement)> = Vec::new();
        let mut forced = 0;
        for (label, mine) in &state.unique {
            if let Some(theirs) = goal.unique.get(label) {
                if mine.loops > theirs.loops {
                    forced += 1;
                } else {
                    shared.push((label, mine, theirs));
                }
            }
        }
        shared.sort_by(|a, b| a.0.cmp(b.0));
        let mut matched = vec![false; shared.len()];
        let mut matching = 0;
        for i in 0..shared.len() {
            for j in i + 1..shared.len() {
                if matched[i] || matched[j] {
                    continue;
                }
                if relation(shared[i].1, shared[j].1) != relation(shared[i].2, shared[j].2) {
                    matched[i] = true;
                    matched[j] = true;
                    matching += 1;
                }
            }
        }

        let mut conditions = 0;
        for (condition, &wanted) in &goal.conditions {
            conditions += wanted.saturating_sub(state.conditions.get(condition).copied().unwrap_or(0)) as usize;
        }
        let needs_delete = surplus
            || forced + matching > 0
            || state.conditional > goal.conditional
            || state.loops > goal.loops
            || state.parallel > goal.parallel;
        let bound = missing
            + forced
            + matching
            + goal.conditional.saturating_sub(state.conditional) as usize
            + goal.loops.saturating_sub(state.loops) as usize
            + conditions
            + usize::from(needs_delete);
        Estimate { bound, needs_delete }
    }

    /// Whether the insert `pattern` puts its activity in a relation to an
    /// existing one that the target contradicts. Only meaningful while the
    /// state needs no delete: the result then needs one, so its bound grows
    /// by two over the state's.
    pub(crate) fn insert_conflicts(&self, state: &Profile, layout: &Layout, pattern: &PatternInstance) -> bool {
        let goal = &self.profile;
        let (label, anchor, inside): (&Label, NodeId, Box<dyn Fn(u32) -> Relation>) = match pattern {
            PatternInstance::SerialInsert { label, anchor } => match *anchor {
                Position::Gap { sequence, index } => {
                    let index = index as u32;
                    let inside = move |child: u32| if child < index { Relation::After } else { Relation::Before };
                    (label, sequence, Box::new(inside))
                }
                Position::Before(node) => (label, node, Box::new(|_| Relation::Before)),
                Position::After(node) => (label, node, Box::new(|_| Relation::After)),
                Position::Skip(node) => (label, node, Box::new(|_| Relation::Exclusive)),
            },
            PatternInstance::ParallelInsert { label, target } => (label, *target, Box::new(|_| Relation::Parallel)),
            _ => return false,
        };
        let (Some(wanted), Some(path)) = (goal.unique.get(label), layout.paths.get(&anchor)) else {
            return false;
        };
        if state.count(label) != 0 {
            return false;
        }
        state.unique.iter().any(|(other, placement)| {
            goal.unique.get(other).is_some_and(|theirs| {
                inserted_relation(path, &inside, placement) != relation(wanted, theirs)
            })
        })
    }

    /// Whether `pattern` can lower the bound of `state` at all. Used to skip
    /// moves when no slack is left.
    pub(crate) fn may_progress(&self, state: &Profile, estimate: &Estimate, pattern: &PatternInstance) -> bool {
        let goal = &self.profile;
        match pattern {
            PatternInstance::SerialInsert { label, .. } | PatternInstance::ParallelInsert { label, .. } => {
                state.count(label) < goal.count(label)
            }
            PatternInstance::DeleteFragment { .. } => estimate.needs_delete,
            PatternInstance::EmbedInLoop { .. } => state.loops < goal.loops,
            PatternInstance::EmbedInConditional { .. } => state.conditional < goal.conditional,
            PatternInstance::UpdateCondition { condition, .. } => {
                goal.conditions.get(condition).copied().unwrap_or(0)
                    > state.conditions.get(condition).copied().unwrap_or(0)
            }
        }
    }
}
