//! Checks whether a partial model can still grow into the solution without
//! deleting anything, and prints a completion when it can.

use patternbench::analysis::dead_end;
use patternbench::model::ProcessModel;
use patternbench::patterns::Alphabet;

fn main() {
    let target: ProcessModel = "SEQ(XOR([c] X, Y))".parse().unwrap();
    let alphabet = Alphabet::of_model(&target);
    for text in ["SEQ()", "SEQ(XOR(X, _))", "SEQ(Y, X)", "SEQ(XOR(X, SEQ(Y, Y)))"] {
        let state: ProcessModel = text.parse().unwrap();
        let verdict = dead_end(&state, &target, &alphabet).expect("search");
        match verdict.witness {
            Some(steps) => {
                let steps: Vec<String> = steps.iter().map(|p| p.to_string()).collect();
                println!("{state}: reachable via {}", steps.join(" ; "));
            }
            None => println!("{state}: dead end"),
        }
    }
}
