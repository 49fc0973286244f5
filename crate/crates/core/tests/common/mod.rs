#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::DiGraph;
use rand::seq::SliceRandom;
use rand::Rng;

use patternbench::graph::{apply_primitive, FlatGraph, GraphNodeKind, Primitive};
use patternbench::model::{canonical_key, BlockNode, Condition, Label, NodeId, NodeKind, ProcessModel};
use patternbench::patterns::{applicable_patterns, apply_pattern, Alphabet, PatternInstance, Position};
use patternbench::session::SessionLog;

pub fn label(text: &str) -> Label {
    Label::new(text).unwrap()
}

pub fn model(text: &str) -> ProcessModel {
    text.parse().unwrap_or_else(|error| panic!("{text}: {error}"))
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|error| panic!("{}: {error}", path.display()))
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_model(name: &str) -> ProcessModel {
    model(&fixture(name))
}

pub fn fig3_log() -> SessionLog {
    SessionLog::from_jsonl(&fixture("fig3.jsonl")).unwrap()
}

/// Insert X, make it optional, put Y into the empty branch, set the guard.
pub fn r4_steps() -> Vec<PatternInstance> {
    vec![
        PatternInstance::SerialInsert { label: label("X"), anchor: Position::Gap { sequence: NodeId(0), index: 0 } },
        PatternInstance::EmbedInConditional { target: NodeId(1), condition: Condition::Unset },
        PatternInstance::SerialInsert { label: label("Y"), anchor: Position::Skip(NodeId(3)) },
        PatternInstance::UpdateCondition { edge: NodeId(1), condition: Condition::expr("c") },
    ]
}

pub fn alphabet(labels: &[&str], conditions: &[&str]) -> Alphabet {
    Alphabet::new(labels.iter().map(|text| label(text))).with_conditions(conditions.iter().map(Condition::expr))
}

/// Random walk of applicable patterns from `start`; returns every state,
/// `start` included, and the patterns taken.
pub fn random_walk(
    rng: &mut impl Rng,
    start: &ProcessModel,
    alphabet: &Alphabet,
    length: usize,
) -> (Vec<ProcessModel>, Vec<PatternInstance>) {
    let mut states = vec![start.clone()];
    let mut steps = Vec::new();
    for _ in 0..length {
        let current = states.last().unwrap();
        let options = applicable_patterns(current, Some(alphabet));
        let Some(pattern) = options.choose(rng).cloned() else { break };
        let next = apply_pattern(current, &pattern).unwrap_or_else(|error| panic!("{current} {pattern}: {error}"));
        states.push(next);
        steps.push(pattern);
    }
    (states, steps)
}

/// Random model in the compact notation with at most `activities` distinct
/// activities and at most `depth` nested blocks below the root sequence.
pub fn random_target(rng: &mut impl Rng, activities: usize, depth: usize) -> ProcessModel {
    loop {
        let mut pool: Vec<&str> = vec!["A", "B", "C", "D", "E", "F"];
        pool.truncate(activities);
        pool.shuffle(rng);
        let count = rng.gen_range(1..=activities);
        pool.truncate(count);
        let text = format!("SEQ({})", random_items(rng, &mut pool, depth).join(", "));
        if let Ok(model) = text.parse::<ProcessModel>() {
            return model;
        }
    }
}

fn random_items(rng: &mut impl Rng, pool: &mut Vec<&str>, depth: usize) -> Vec<String> {
    let mut items = Vec::new();
    while !pool.is_empty() {
        items.push(random_node(rng, pool, depth));
        if rng.gen_bool(0.3) {
            break;
        }
    }
    items
}

fn guard(rng: &mut impl Rng) -> &'static str {
    ["", "[x] ", "[y] "][rng.gen_range(0..3)]
}

fn random_node(rng: &mut impl Rng, pool: &mut Vec<&str>, depth: usize) -> String {
    let choice = if depth == 0 || pool.len() < 2 { 0 } else { rng.gen_range(0..5) };
    match choice {
        1 => {
            let left = random_items(rng, pool, depth - 1).join(", ");
            let right = random_items(rng, pool, depth - 1).join(", ");
            if right.is_empty() {
                return format!("SEQ({left})");
            }
            format!("AND(SEQ({left}), SEQ({right}))")
        }
        2 => {
            let left = random_items(rng, pool, depth - 1).join(", ");
            let right = if rng.gen_bool(0.3) || pool.is_empty() {
                "_".to_string()
            } else {
                format!("SEQ({})", random_items(rng, pool, depth - 1).join(", "))
            };
            format!("XOR({}SEQ({left}), {}{right})", guard(rng), guard(rng))
        }
        3 => format!("LOOP({}SEQ({}))", guard(rng), random_items(rng, pool, depth - 1).join(", ")),
        4 => format!("XOR({}SEQ({}), {}_)", guard(rng), random_items(rng, pool, depth - 1).join(", "), guard(rng)),
        _ => pool.pop().unwrap().to_string(),
    }
}

struct Counts<'a> {
    labels: BTreeMap<&'a Label, usize>,
    conditions: BTreeMap<&'a Condition, usize>,
    conditionals: usize,
    loops: usize,
    parallels: usize,
    /// Root path of every activity: (block kind, child index) per level.
    /// Only filled when asked for.
    places: BTreeMap<&'a Label, Vec<(u8, usize)>>,
}

fn counts(model: &ProcessModel, places: bool) -> Counts<'_> {
    let mut counts = Counts {
        labels: BTreeMap::new(),
        conditions: BTreeMap::new(),
        conditionals: 0,
        loops: 0,
        parallels: 0,
        places: BTreeMap::new(),
    };
    visit(model.root(), &mut Vec::new(), places, &mut counts);
    counts
}

fn visit<'a>(node: &'a BlockNode, path: &mut Vec<(u8, usize)>, places: bool, counts: &mut Counts<'a>) {
    if let Some(condition) = node.condition.as_ref().filter(|condition| !condition.is_unset()) {
        *counts.conditions.entry(condition).or_insert(0) += 1;
    }
    let code = match &node.kind {
        NodeKind::Activity(label) => {
            *counts.labels.entry(label).or_insert(0) += 1;
            if places {
                counts.places.insert(label, path.clone());
            }
            return;
        }
        NodeKind::Skip => return,
        NodeKind::Sequence => b's',
        NodeKind::Parallel => {
            counts.parallels += 1;
            b'p'
        }
        NodeKind::Conditional => {
            counts.conditionals += 1;
            b'x'
        }
        NodeKind::Loop => {
            counts.loops += 1;
            b'l'
        }
    };
    for (index, child) in node.children.iter().enumerate() {
        path.push((code, index));
        visit(child, path, places, counts);
        path.pop();
    }
}

/// 0 before, 1 after, 2 parallel, 3 exclusive.
fn relation(a: &[(u8, usize)], b: &[(u8, usize)]) -> u8 {
    let (x, y) = a.iter().zip(b).find(|(x, y)| x.1 != y.1).unwrap();
    match x.0 {
        b's' => u8::from(x.1 > y.1),
        b'p' => 2,
        _ => 3,
    }
}

fn loops_on(path: &[(u8, usize)]) -> usize {
    path.iter().filter(|step| step.0 == b'l').count()
}

fn deficit<K: Ord>(want: &BTreeMap<K, usize>, have: &BTreeMap<K, usize>) -> usize {
    want.iter().map(|(key, &want)| want.saturating_sub(have.get(key).copied().unwrap_or(0))).sum()
}

/// Some activity present once in both models relates wrongly to another one
/// or sits in more loops than in the target.
fn misplaced(have: &Counts, target: &Counts) -> bool {
    let unique: Vec<&Label> = have
        .labels
        .iter()
        .filter(|(label, &n)| n == 1 && target.labels.get(*label) == Some(&1))
        .map(|(label, _)| *label)
        .collect();
    if unique.iter().any(|label| loops_on(&have.places[label]) > loops_on(&target.places[label])) {
        return true;
    }
    for (i, a) in unique.iter().enumerate() {
        for b in &unique[i + 1..] {
            if relation(&have.places[a], &have.places[b]) != relation(&target.places[a], &target.places[b]) {
                return true;
            }
        }
    }
    false
}

/// Bound used by the oracle.
///
/// A single pattern adds at most one activity, or one conditional, or one
/// loop, or (updates only) one condition expression, or it deletes.
/// Anything the state has more of than the target needs a delete. Patterns
/// other than deletes keep the order, parallel or exclusive relation of two
/// existing activities and never take an activity out of a loop; a pair
/// relating wrongly, or an activity in too many loops, costs a delete and
/// the reinsertion of an activity that is not missing yet.
///
/// Returns early with a value above `cap` once the counting part alone
/// exceeds it.
fn simple_bound(state: &ProcessModel, target: &Counts, positions: bool, cap: usize) -> usize {
    let have = counts(state, false);
    let surplus = deficit(&have.labels, &target.labels) > 0
        || have.conditionals > target.conditionals
        || have.loops > target.loops;
    let missing = deficit(&target.labels, &have.labels)
        + deficit(&target.conditions, &have.conditions)
        + target.conditionals.saturating_sub(have.conditionals)
        + target.loops.saturating_sub(have.loops);
    let counted = missing + usize::from(surplus);
    if !positions || counted > cap {
        return counted;
    }
    let placed = counts(state, true);
    missing + if misplaced(&placed, target) { 2 } else { usize::from(surplus) }
}

/// Distance by plain breadth-first enumeration of every applicable pattern,
/// cut only by the bound above. With `positions` off only the counting part
/// of the bound is used.
pub fn oracle_distance(source: &ProcessModel, target: &ProcessModel, alphabet: &Alphabet, positions: bool) -> usize {
    let goal = canonical_key(target);
    let counts = counts(target, true);
    let mut limit = simple_bound(source, &counts, positions, usize::MAX);
    loop {
        let mut seen: HashSet<String> = HashSet::from([canonical_key(source)]);
        let mut layer = vec![source.clone()];
        for depth in 0..=limit {
            if layer.iter().any(|state| canonical_key(state) == goal) {
                return depth;
            }
            let mut next = Vec::new();
            for state in &layer {
                let Some(cap) = limit.checked_sub(depth + 1) else { break };
                for pattern in applicable_patterns(state, Some(alphabet)) {
                    let after = apply_pattern(state, &pattern).unwrap();
                    if simple_bound(&after, &counts, positions, cap) > cap {
                        continue;
                    }
                    if seen.insert(canonical_key(&after)) {
                        next.push(after);
                    }
                }
            }
            layer = next;
        }
        limit += 1;
    }
}

/// The model with every guard UNSET, through the notation.
pub fn without_guards(model: &ProcessModel) -> ProcessModel {
    let text = model.to_string();
    let mut out = String::new();
    let mut depth = 0;
    for c in text.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out.replace("( ", "(").replace(",  ", ", ").parse().unwrap()
}

/// Whether `target` is reachable from `state` without deletes, by plain
/// enumeration. Without deletes a model never shrinks and never loses an
/// activity or gateway. With `invariants` on, states breaking the relation
/// invariant above are dropped too, and guards are ignored because an update
/// can set any guard at any time.
pub fn oracle_reachable_without_delete(
    state: &ProcessModel,
    target: &ProcessModel,
    alphabet: &Alphabet,
    invariants: bool,
) -> bool {
    let key = |model: &ProcessModel| if invariants { canonical_key(&without_guards(model)) } else { canonical_key(model) };
    let goal = key(target);
    let size = target.root().size();
    let want = counts(target, true);
    let hopeless = |model: &ProcessModel| {
        let have = counts(model, invariants);
        model.root().size() > size
            || deficit(&have.labels, &want.labels) > 0
            || have.conditionals > want.conditionals
            || have.loops > want.loops
            || have.parallels > want.parallels
            || (invariants && misplaced(&have, &want))
    };
    if hopeless(state) {
        return false;
    }
    let mut seen: HashSet<String> = HashSet::from([key(state)]);
    let mut queue = vec![state.clone()];
    while let Some(current) = queue.pop() {
        if key(&current) == goal {
            return true;
        }
        for pattern in applicable_patterns(&current, Some(alphabet)) {
            match pattern {
                PatternInstance::DeleteFragment { .. } => continue,
                PatternInstance::UpdateCondition { .. } if invariants => continue,
                _ => {}
            }
            let after = apply_pattern(&current, &pattern).unwrap();
            if !hopeless(&after) && seen.insert(key(&after)) {
                queue.push(after);
            }
        }
    }
    false
}

pub fn fold(graph: &FlatGraph, primitives: &[Primitive]) -> FlatGraph {
    primitives.iter().fold(graph.clone(), |graph, primitive| apply_primitive(&graph, primitive).unwrap())
}

fn to_petgraph(graph: &FlatGraph) -> DiGraph<String, String> {
    let mut out = DiGraph::new();
    let mut index = HashMap::new();
    for node in graph.nodes() {
        let weight = match &node.kind {
            GraphNodeKind::Activity { label } => format!("activity:{}", label.as_str()),
            other => format!("{other:?}"),
        };
        index.insert(node.id, out.add_node(weight));
    }
    for edge in graph.edges() {
        let weight = edge.condition.as_ref().map_or(String::new(), |condition| format!("{condition:?}"));
        out.add_edge(index[&edge.from], index[&edge.to], weight);
    }
    out
}

/// Isomorphism respecting node kinds, labels and edge conditions, ignoring
/// ids.
pub fn isomorphic(a: &FlatGraph, b: &FlatGraph) -> bool {
    is_isomorphic_matching(&to_petgraph(a), &to_petgraph(b), |x, y| x == y, |x, y| x == y)
}
