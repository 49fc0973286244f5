//! JSON document format for models:
//! `{"format":"patternbench-model","version":1,"next_id":<n>,"root":<node>}`.
//! `next_id` is optional on input; it keeps ids of deleted nodes retired.

use serde::{Deserialize, Deserializer, Serialize};

use super::{BlockNode, Condition, Label, ModelError, NodeId, NodeKind, ProcessModel, Violation, ViolationCode};

pub const MODEL_FORMAT: &str = "patternbench-model";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    next_id: Option<u32>,
    root: NodeDoc,
}

fn document(model: &ProcessModel) -> Document {
    Document {
        format: MODEL_FORMAT.to_string(),
        version: 1,
        next_id: Some(model.next_id),
        root: to_doc(model.root()),
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Activity,
    Skip,
    Sequence,
    Parallel,
    Conditional,
    Loop,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u32,
    kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    // Present-but-null is UNSET, absent is "no guard".
    #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
    condition: Option<Condition>,
    #[serde(default)]
    children: Vec<NodeDoc>,
}

fn present<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Condition>, D::Error> {
    Condition::deserialize(deserializer).map(Some)
}

pub fn serialize(model: &ProcessModel) -> String {
    serde_json::to_string_pretty(&document(model)).expect("model documents always serialize")
}

pub fn to_json_value(model: &ProcessModel) -> serde_json::Value {
    serde_json::to_value(document(model)).expect("model documents always serialize")
}

fn to_doc(node: &BlockNode) -> NodeDoc {
    let (kind, label) = match &node.kind {
        NodeKind::Activity(label) => (KindDoc::Activity, Some(label.as_str().to_string())),
        NodeKind::Skip => (KindDoc::Skip, None),
        NodeKind::Sequence => (KindDoc::Sequence, None),
        NodeKind::Parallel => (KindDoc::Parallel, None),
        NodeKind::Conditional => (KindDoc::Conditional, None),
        NodeKind::Loop => (KindDoc::Loop, None),
    };
    NodeDoc {
        id: node.id.0,
        kind,
        label,
        condition: node.condition.clone(),
        children: node.children.iter().map(to_doc).collect(),
    }
}

pub fn deserialize(text: &str) -> Result<ProcessModel, ModelError> {
    let document: Document = serde_json::from_str(text)
        .map_err(|error| ModelError::Parse { line: error.line(), column: error.column(), message: error.to_string() })?;
    from_document(document)
}

pub fn from_json_value(value: serde_json::Value) -> Result<ProcessModel, ModelError> {
    let document: Document = serde_json::from_value(value)
        .map_err(|error| ModelError::Parse { line: 0, column: 0, message: error.to_string() })?;
    from_document(document)
}

fn from_document(document: Document) -> Result<ProcessModel, ModelError> {
    if document.format != MODEL_FORMAT || document.version != 1 {
        return Err(ModelError::Parse {
            line: 1,
            column: 1,
            message: format!("unsupported document {:?} version {}", document.format, document.version),
        });
    }
    let mut violations = Vec::new();
    let root = from_doc(document.root, None, &mut violations);
    if !violations.is_empty() {
        return Err(ModelError::InvariantViolation(violations));
    }
    let mut model = ProcessModel::from_tree(root)?;
    model.next_id = model.next_id.max(document.next_id.unwrap_or(0));
    Ok(model)
}

fn from_doc(doc: NodeDoc, parent: Option<KindDoc>, violations: &mut Vec<Violation>) -> BlockNode {
    let id = NodeId(doc.id);
    let kind = match doc.kind {
        KindDoc::Activity => match doc.label.as_deref().and_then(Label::new) {
            Some(label) => NodeKind::Activity(label),
            None => {
                violations.push(Violation {
                    code: ViolationCode::ActivityWithChildren,
                    node: Some(id),
                    message: "activity needs a non-empty label".into(),
                });
                NodeKind::Skip
            }
        },
        KindDoc::Skip => NodeKind::Skip,
        KindDoc::Sequence => NodeKind::Sequence,
        KindDoc::Parallel => NodeKind::Parallel,
        KindDoc::Conditional => NodeKind::Conditional,
        KindDoc::Loop => NodeKind::Loop,
    };
    if doc.kind != KindDoc::Activity && doc.label.is_some() {
        violations.push(Violation {
            code: ViolationCode::ActivityWithChildren,
            node: Some(id),
            message: "only activities carry labels".into(),
        });
    }
    // Guarded children may omit the slot; it is read as UNSET.
    let guarded = matches!(parent, Some(KindDoc::Conditional | KindDoc::Loop));
    let condition = match doc.condition {
        None if guarded => Some(Condition::Unset),
        other => other,
    };
    let children = doc.children.into_iter().map(|child| from_doc(child, Some(doc.kind), violations)).collect();
    BlockNode { id, kind, children, condition }
}
