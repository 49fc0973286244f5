use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Identifier of a node inside one [`ProcessModel`](super::ProcessModel).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Non-empty activity label. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(text: impl AsRef<str>) -> Option<Label> {
        let text = text.as_ref();
        if text.is_empty() {
            None
        } else {
            Some(Label(Arc::from(text)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Label::new(text).ok_or_else(|| serde::de::Error::custom("activity label must not be empty"))
    }
}

/// Guard on the edge leaving a gateway: a conditional branch condition or a
/// loop-back condition.
///
/// `Expr` orders before `Unset`, which is the order canonical form relies on.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Expr(Arc<str>),
    Unset,
}

impl Condition {
    pub fn expr(text: impl AsRef<str>) -> Condition {
        Condition::Expr(Arc::from(text.as_ref()))
    }

    pub fn is_unset(&self) -> bool {
        matches!(self, Condition::Unset)
    }

    pub fn as_expr(&self) -> Option<&str> {
        match self {
            Condition::Expr(text) => Some(text),
            Condition::Unset => None,
        }
    }
}

impl Default for Condition {
    fn default() -> Self {
        Condition::Unset
    }
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Expr(text) => write!(f, "{:?}", &**text),
            Condition::Unset => f.write_str("UNSET"),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Expr(text) => f.write_str(text),
            Condition::Unset => f.write_str("?"),
        }
    }
}

// UNSET travels as JSON null, expressions as strings.
impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Condition::Expr(text) => serializer.serialize_str(text),
            Condition::Unset => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match Option::<String>::deserialize(deserializer)? {
            Some(text) => Condition::Expr(Arc::from(text)),
            None => Condition::Unset,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Activity(Label),
    /// Empty branch of a conditional.
    Skip,
    Sequence,
    Parallel,
    Conditional,
    /// Do-while loop: the body runs once, then repeats while the guard on the
    /// body holds.
    Loop,
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Activity(_) => "activity",
            NodeKind::Skip => "skip",
            NodeKind::Sequence => "sequence",
            NodeKind::Parallel => "parallel",
            NodeKind::Conditional => "conditional",
            NodeKind::Loop => "loop",
        }
    }

    /// Whether children of this kind carry a guard.
    pub fn guards_children(&self) -> bool {
        matches!(self, NodeKind::Conditional | NodeKind::Loop)
    }
}

/// One node of a block-structured process tree.
///
/// `condition` is the guard on the edge from the parent gateway into this
/// node. It is present exactly when the parent is a conditional (branch
/// condition) or a loop (loop-back condition of the body).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<BlockNode>,
    pub condition: Option<Condition>,
}

impl BlockNode {
    pub fn new(id: NodeId, kind: NodeKind, children: Vec<BlockNode>) -> BlockNode {
        BlockNode { id, kind, children, condition: None }
    }

    pub fn activity(id: NodeId, label: Label) -> BlockNode {
        BlockNode::new(id, NodeKind::Activity(label), Vec::new())
    }

    pub fn skip(id: NodeId) -> BlockNode {
        BlockNode::new(id, NodeKind::Skip, Vec::new())
    }

    pub fn with_condition(mut self, condition: Condition) -> BlockNode {
        self.condition = Some(condition);
        self
    }

    pub fn label(&self) -> Option<&Label> {
        match &self.kind {
            NodeKind::Activity(label) => Some(label),
            _ => None,
        }
    }

    pub fn is_skip(&self) -> bool {
        self.kind == NodeKind::Skip
    }

    pub fn is_sequence(&self) -> bool {
        self.kind == NodeKind::Sequence
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Walk<'_> {
        Walk { stack: vec![self] }
    }

    pub fn find(&self, id: NodeId) -> Option<&BlockNode> {
        self.walk().find(|node| node.id == id)
    }

    /// Child-index path from `self` to the node with `id`.
    pub fn path_to(&self, id: NodeId) -> Option<Vec<usize>> {
        fn go(node: &BlockNode, id: NodeId, path: &mut Vec<usize>) -> bool {
            if node.id == id {
                return true;
            }
            for (index, child) in node.children.iter().enumerate() {
                path.push(index);
                if go(child, id, path) {
                    return true;
                }
                path.pop();
            }
            false
        }
        let mut path = Vec::new();
        go(self, id, &mut path).then_some(path)
    }

    pub fn at_path(&self, path: &[usize]) -> &BlockNode {
        path.iter().fold(self, |node, &index| &node.children[index])
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> &mut BlockNode {
        path.iter().fold(self, |node, &index| &mut node.children[index])
    }

    /// Labels of all activities below (and including) this node, in
    /// pre-order.
    pub fn labels(&self) -> Vec<Label> {
        self.walk().filter_map(|node| node.label().cloned()).collect()
    }

    pub fn size(&self) -> usize {
        self.walk().count()
    }

    pub fn max_id(&self) -> NodeId {
        self.walk().map(|node| node.id).max().unwrap_or(NodeId(0))
    }
}

pub struct Walk<'a> {
    stack: Vec<&'a BlockNode>,
}

impl<'a> Iterator for Walk<'a> {
    type Item = &'a BlockNode;

    fn next(&mut self) -> Option<&'a BlockNode> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}
