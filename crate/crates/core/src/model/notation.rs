//! Compact text notation for models.
//!
//! ```text
//! SEQ(A, AND(B, C), XOR([x > 5] D, _), LOOP([again] E))
//! ```
//!
//! `_` is an empty conditional branch. A bracketed prefix sets the guard of a
//! conditional branch or loop body; `[?]` (or no prefix) means UNSET. Labels
//! that are not plain identifiers are written as JSON strings.

use std::fmt;

use super::{BlockNode, Condition, Label, ModelError, NodeId, NodeKind, ProcessModel};

pub(crate) fn parse(text: &str) -> Result<ProcessModel, ModelError> {
    let mut parser = Parser { text, pos: 0 };
    let root = parser.node(None)?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(parser.error("trailing input"));
    }
    ProcessModel::from_template(root)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

const KEYWORDS: [(&str, NodeKind); 4] = [
    ("SEQ", NodeKind::Sequence),
    ("AND", NodeKind::Parallel),
    ("XOR", NodeKind::Conditional),
    ("LOOP", NodeKind::Loop),
];

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-')
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ModelError {
        let consumed = &self.text[..self.pos];
        let line = consumed.matches('\n').count() + 1;
        let column = consumed.rsplit('\n').next().map_or(0, |tail| tail.chars().count()) + 1;
        ModelError::Parse { line, column, message: message.to_string() }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn quoted(&mut self) -> Result<String, ModelError> {
        let mut stream = serde_json::Deserializer::from_str(self.rest()).into_iter::<String>();
        match stream.next() {
            Some(Ok(value)) => {
                self.pos += stream.byte_offset();
                Ok(value)
            }
            _ => Err(self.error("malformed quoted string")),
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        let len: usize = self.rest().chars().take_while(|&c| is_ident_char(c)).map(char::len_utf8).sum();
        self.pos += len;
        &self.text[start..self.pos]
    }

    fn guard(&mut self) -> Result<Option<Condition>, ModelError> {
        if !self.eat('[') {
            return Ok(None);
        }
        self.skip_ws();
        let condition = if self.rest().starts_with('"') {
            Condition::expr(self.quoted()?)
        } else {
            let end = self.rest().find(']').ok_or_else(|| self.error("unclosed condition"))?;
            let raw = self.rest()[..end].trim().to_string();
            self.pos += end;
            if raw == "?" {
                Condition::Unset
            } else if raw.is_empty() {
                return Err(self.error("empty condition"));
            } else {
                Condition::expr(raw)
            }
        };
        if !self.eat(']') {
            return Err(self.error("expected ']'"));
        }
        Ok(Some(condition))
    }

    fn node(&mut self, parent: Option<&NodeKind>) -> Result<BlockNode, ModelError> {
        let guarded = parent.is_some_and(NodeKind::guards_children);
        let guard = self.guard()?;
        if guard.is_some() && !guarded {
            return Err(self.error("conditions only apply to conditional branches and loop bodies"));
        }
        self.skip_ws();
        let mut node = if self.rest().starts_with('"') {
            let text = self.quoted()?;
            let label = Label::new(text).ok_or_else(|| self.error("empty label"))?;
            BlockNode::activity(NodeId(0), label)
        } else {
            let word = self.ident().to_string();
            if word.is_empty() {
                return Err(self.error("expected a node"));
            }
            let keyword = KEYWORDS.iter().find(|(name, _)| *name == word);
            match keyword {
                Some((_, kind)) if self.eat('(') => {
                    let mut children = Vec::new();
                    if !self.eat(')') {
                        loop {
                            children.push(self.node(Some(kind))?);
                            if self.eat(')') {
                                break;
                            }
                            if !self.eat(',') {
                                return Err(self.error("expected ',' or ')'"));
                            }
                        }
                    }
                    BlockNode::new(NodeId(0), kind.clone(), children)
                }
                _ if word == "_" || word == "SKIP" => BlockNode::skip(NodeId(0)),
                _ => BlockNode::activity(NodeId(0), Label::new(word).expect("non-empty")),
            }
        };
        if guarded {
            node.condition = Some(guard.unwrap_or(Condition::Unset));
        }
        Ok(node)
    }
}

fn write_label(f: &mut fmt::Formatter<'_>, label: &Label) -> fmt::Result {
    let text = label.as_str();
    let plain = text.chars().all(is_ident_char)
        && text != "_"
        && text != "SKIP"
        && !KEYWORDS.iter().any(|(name, _)| *name == text);
    if plain {
        f.write_str(text)
    } else {
        write!(f, "{}", serde_json::to_string(text).expect("string"))
    }
}

fn write_guard(f: &mut fmt::Formatter<'_>, condition: &Condition) -> fmt::Result {
    match condition {
        Condition::Unset => Ok(()),
        Condition::Expr(text) => {
            let raw_ok = !text.is_empty()
                && text.trim() == &**text
                && !text.contains(']')
                && !text.starts_with('"')
                && &**text != "?";
            if raw_ok {
                write!(f, "[{text}] ")
            } else {
                write!(f, "[{}] ", serde_json::to_string(&**text).expect("string"))
            }
        }
    }
}

pub(crate) fn write_node(f: &mut fmt::Formatter<'_>, node: &BlockNode) -> fmt::Result {
    if let Some(condition) = &node.condition {
        write_guard(f, condition)?;
    }
    let keyword = match &node.kind {
        NodeKind::Activity(label) => return write_label(f, label),
        NodeKind::Skip => return f.write_str("_"),
        NodeKind::Sequence => "SEQ",
        NodeKind::Parallel => "AND",
        NodeKind::Conditional => "XOR",
        NodeKind::Loop => "LOOP",
    };
    write!(f, "{keyword}(")?;
    for (index, child) in node.children.iter().enumerate() {
        if index > 0 {
            f.write_str(", ")?;
        }
        write_node(f, child)?;
    }
    f.write_str(")")
}
