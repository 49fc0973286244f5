//! Computes the pattern distance between two models and lists the optimal
//! paths. With no arguments, from the empty model to `SEQ(XOR([c] X, Y))`.

use patternbench::analysis::{distance, DistanceOptions};
use patternbench::model::ProcessModel;
use patternbench::patterns::Alphabet;

fn parse(text: &str) -> ProcessModel {
    text.parse().unwrap_or_else(|error| panic!("{text}: {error}"))
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (source, target) = match args.as_slice() {
        [] => (ProcessModel::new_empty(), parse("SEQ(XOR([c] X, Y))")),
        [target] => (ProcessModel::new_empty(), parse(target)),
        [source, target, ..] => (parse(source), parse(target)),
    };
    let alphabet = Alphabet::of_model(&target).union(&Alphabet::of_model(&source));
    let options = DistanceOptions { enumerate_limit: 5, ..DistanceOptions::default() };
    match distance(&source, &target, &alphabet, &options) {
        Ok(result) => {
            println!("d({source}, {target}) = {}", result.d);
            println!("{} optimal paths, {} states explored", result.path_count, result.explored_states);
            for (k, path) in result.paths().enumerate() {
                println!("{}:", k + 1);
                for pattern in path {
                    println!("    {pattern}");
                }
            }
        }
        Err(error) => eprintln!("{error}"),
    }
}
