use crate::model::{BlockNode, NodeId, NodeKind, ProcessModel};

use super::{FlatGraph, GraphNodeId, GraphNodeKind};

const START: GraphNodeId = GraphNodeId(0);
const END: GraphNodeId = GraphNodeId(1);

/// Graph node ids derived from a model node id: the activity, split or loop
/// entry first, then the matching join or loop exit.
pub fn graph_ids(id: NodeId) -> (GraphNodeId, GraphNodeId) {
    (GraphNodeId(2 * id.0 + 2), GraphNodeId(2 * id.0 + 3))
}

/// Lowers a model to its flat graph. Conditions sit on the split edges of
/// conditional branches and on the back edge of loops.
pub fn to_graph(model: &ProcessModel) -> FlatGraph {
    let mut graph = FlatGraph::default();
    graph.insert_node(START, GraphNodeKind::Start);
    graph.insert_node(END, GraphNodeKind::End);
    match lower(&mut graph, model.root()) {
        Some((entry, exit)) => {
            graph.insert_edge(START, entry, None);
            graph.insert_edge(exit, END, None);
        }
        None => graph.insert_edge(START, END, None),
    }
    graph
}

fn lower(graph: &mut FlatGraph, node: &BlockNode) -> Option<(GraphNodeId, GraphNodeId)> {
    let (primary, secondary) = graph_ids(node.id);
    match &node.kind {
        NodeKind::Activity(label) => {
            graph.insert_node(primary, GraphNodeKind::Activity { label: label.clone() });
            Some((primary, primary))
        }
        NodeKind::Skip => None,
        NodeKind::Sequence => {
            let mut span: Option<(GraphNodeId, GraphNodeId)> = None;
            for child in &node.children {
                if let Some((entry, exit)) = lower(graph, child) {
                    span = match span {
                        None => Some((entry, exit)),
                        Some((first, last)) => {
                            graph.insert_edge(last, entry, None);
                            Some((first, exit))
                        }
                    };
                }
            }
            span
        }
        NodeKind::Parallel | NodeKind::Conditional => {
            let (split, join) = if matches!(node.kind, NodeKind::Parallel) {
                (GraphNodeKind::AndSplit, GraphNodeKind::AndJoin)
            } else {
                (GraphNodeKind::XorSplit, GraphNodeKind::XorJoin)
            };
            graph.insert_node(primary, split);
            graph.insert_node(secondary, join);
            for child in &node.children {
                match lower(graph, child) {
                    Some((entry, exit)) => {
                        graph.insert_edge(primary, entry, child.condition.clone());
                        graph.insert_edge(exit, secondary, None);
                    }
                    None => graph.insert_edge(primary, secondary, child.condition.clone()),
                }
            }
            Some((primary, secondary))
        }
        NodeKind::Loop => {
            graph.insert_node(primary, GraphNodeKind::XorJoin);
            graph.insert_node(secondary, GraphNodeKind::XorSplit);
            let body = &node.children[0];
            let (entry, exit) = lower(graph, body).expect("loop bodies are never empty");
            graph.insert_edge(primary, entry, None);
            graph.insert_edge(exit, secondary, None);
            graph.insert_edge(secondary, primary, body.condition.clone());
            Some((primary, secondary))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Condition;

    #[test]
    fn empty_model_is_trivial_graph() {
        assert_eq!(to_graph(&ProcessModel::new_empty()), FlatGraph::trivial());
    }

    #[test]
    fn conditional_skip_is_a_direct_edge() {
        let graph = to_graph(&"SEQ(XOR([x] A, _))".parse().unwrap());
        // root 0, xor 1, A 2, skip 3
        let (split, join) = graph_ids(NodeId(1));
        let a = graph_ids(NodeId(2)).0;
        assert_eq!(graph.edge(split, a).unwrap().condition, Some(Condition::expr("x")));
        assert_eq!(graph.edge(split, join).unwrap().condition, Some(Condition::Unset));
        assert_eq!(graph.node_count(), 5);
        assert_eq!(graph.edge_count(), 5);
    }

    #[test]
    fn loop_condition_is_on_back_edge() {
        let graph = to_graph(&"SEQ(LOOP([again] A))".parse().unwrap());
        let (entry, exit) = graph_ids(NodeId(1));
        assert_eq!(graph.edge(exit, entry).unwrap().condition, Some(Condition::expr("again")));
        assert_eq!(graph.edge(exit, GraphNodeId(1)).unwrap().condition, None);
    }
}
