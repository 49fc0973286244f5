//! Lowers a model to its flat graph and prints it as DOT, followed by the
//! graph edits that turn it into a second model.

use patternbench::graph::{diff, to_graph};
use patternbench::model::ProcessModel;
use patternbench::service::cli::to_dot;

fn main() {
    let from: ProcessModel = "SEQ(A, XOR([ok] B, C))".parse().unwrap();
    let to: ProcessModel = "SEQ(A, AND(B, C))".parse().unwrap();
    let graph = to_graph(&from);
    println!("{}", to_dot(&graph));
    eprintln!("{} nodes, {} edges", graph.node_count(), graph.edge_count());
    for primitive in diff(&graph, &to_graph(&to)) {
        eprintln!("{primitive:?}");
    }
}
