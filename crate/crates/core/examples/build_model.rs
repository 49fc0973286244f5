//! Parses a model from compact notation, checks it and prints its canonical
//! digest and JSON document.

use patternbench::graph::{check_soundness, to_graph};
use patternbench::model::{canonicalize, serialize, ProcessModel};

fn main() {
    let text = std::env::args().nth(1).unwrap_or_else(|| "SEQ(A, AND(B, XOR([ok] C, [retry] D)), E)".into());
    let model: ProcessModel = match text.parse() {
        Ok(model) => model,
        Err(error) => {
            eprintln!("{error}");
            std::process::exit(1);
        }
    };
    println!("notation:   {model}");
    println!("activities: {}", model.activity_count());

    // Branch order inside AND and XOR blocks does not change the digest.
    let canonical = canonicalize(&model);
    println!("canonical:  {}", canonical.model);
    println!("digest:     {}", canonical.digest);

    let report = check_soundness(&to_graph(&model));
    println!("sound:      {}", report.sound);
    println!("{}", serialize(&model));
}
