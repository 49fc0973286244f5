use std::fmt;

use serde::{Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use super::{BlockNode, Condition, NodeId, NodeKind, ProcessModel};

/// SHA-256 over the canonical structural key of a model.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &hex::encode(self.0)[..12])
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A model in canonical form together with its digest.
///
/// Two models get the same digest iff their canonical trees are structurally
/// equal. Canonical trees have parallel branches sorted by structure,
/// conditional branches sorted by (condition, structure) with UNSET last, and
/// ids renumbered in pre-order starting at 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub digest: Digest,
    pub model: ProcessModel,
}

pub fn canonicalize(model: &ProcessModel) -> CanonicalForm {
    let (key, model) = canonical_parts(model);
    CanonicalForm { digest: digest_of(&key), model }
}

/// The structural key the digest is computed over. Equal keys mean equal
/// canonical trees.
pub fn canonical_key(model: &ProcessModel) -> String {
    sorted(model.root()).0
}

/// Ids of `model` in the order canonical renumbering visits them: entry `i`
/// becomes id `i` in the canonical model.
pub fn canonical_order(model: &ProcessModel) -> Vec<NodeId> {
    sorted(model.root()).1.walk().map(|node| node.id).collect()
}

pub(crate) fn digest_of(key: &str) -> Digest {
    Digest(Sha256::digest(key.as_bytes()).into())
}

pub(crate) fn canonical_parts(model: &ProcessModel) -> (String, ProcessModel) {
    let (key, mut root) = sorted(model.root());
    let mut counter = 0;
    renumber(&mut root, &mut counter);
    (key, ProcessModel::from_parts_unchecked(root, counter))
}

fn renumber(node: &mut BlockNode, counter: &mut u32) {
    node.id = NodeId(*counter);
    *counter += 1;
    for child in &mut node.children {
        renumber(child, counter);
    }
}

fn guard_key(condition: &Option<Condition>, out: &mut String) {
    match condition {
        Some(Condition::Expr(text)) => out.push_str(&serde_json::to_string(&**text).expect("string")),
        Some(Condition::Unset) => out.push('?'),
        None => {}
    }
}

fn sorted(node: &BlockNode) -> (String, BlockNode) {
    let mut children: Vec<(String, BlockNode)> = node.children.iter().map(sorted).collect();
    match node.kind {
        NodeKind::Parallel => children.sort_by(|a, b| a.0.cmp(&b.0)),
        NodeKind::Conditional => children.sort_by(|a, b| (&a.1.condition, &a.0).cmp(&(&b.1.condition, &b.0))),
        _ => {}
    }
    let mut key = String::new();
    match &node.kind {
        NodeKind::Activity(label) => key.push_str(&serde_json::to_string(label.as_str()).expect("string")),
        NodeKind::Skip => key.push('_'),
        NodeKind::Sequence => key.push('S'),
        NodeKind::Parallel => key.push('P'),
        NodeKind::Conditional => key.push('X'),
        NodeKind::Loop => key.push('L'),
    }
    if !children.is_empty() || node.is_sequence() {
        key.push('(');
        for (index, (child_key, child)) in children.iter().enumerate() {
            if index > 0 {
                key.push(',');
            }
            if child.condition.is_some() {
                guard_key(&child.condition, &mut key);
                key.push(':');
            }
            key.push_str(child_key);
        }
        key.push(')');
    }
    let node = BlockNode {
        id: node.id,
        kind: node.kind.clone(),
        children: children.into_iter().map(|(_, child)| child).collect(),
        condition: node.condition.clone(),
    };
    (key, node)
}
