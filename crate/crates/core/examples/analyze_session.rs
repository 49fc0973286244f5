//! Analyzes a recorded session against its solution and prints the
//! deviation report under each way of counting undo.

use patternbench::analysis::{analyze_session, DeviationOptions, RegionMap, StepMarker, UndoCounting};
use patternbench::model::ProcessModel;
use patternbench::session::SessionLog;

fn read(path: &str) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|error| panic!("{path}: {error}"))
}

fn main() {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (log, solution, regions) = match args.as_slice() {
        [log, solution] => (read(log), read(solution), None),
        [log, solution, regions, ..] => (read(log), read(solution), Some(read(regions))),
        _ => (
            read(&format!("{fixtures}/fig3.jsonl")),
            read(&format!("{fixtures}/r4.model")),
            Some(read(&format!("{fixtures}/r4.regions.json"))),
        ),
    };
    let log = SessionLog::from_jsonl(&log).expect("session log");
    let solution: ProcessModel = patternbench::service::parse_model(&solution).expect("solution model");
    let regions = regions.map(|text| RegionMap::from_json(&text).expect("region map"));

    let report = analyze_session(&log, &solution, regions.as_ref(), &DeviationOptions::default()).expect("analysis");
    println!("session {} on {}", report.session_id, report.task_id);
    for step in &report.per_step {
        let event = &log.events[step.event];
        let mark = match step.marker {
            StepMarker::OnOptimalPath => " ",
            _ => "*",
        };
        println!("  {mark} {:>3} {:?} {:?}", event.seq, step.marker, event.action.kind());
    }
    println!("process={} product={} dead ends at {:?}", report.process_deviations, report.product_deviations, report.dead_end_steps);
    for (region, counts) in &report.per_region {
        println!("  region {region}: process={} product={}", counts.process, counts.product);
    }

    for undo in [UndoCounting::Net, UndoCounting::Once, UndoCounting::Twice] {
        let options = DeviationOptions { undo, ..DeviationOptions::default() };
        let report = analyze_session(&log, &solution, None, &options).expect("analysis");
        println!("undo {undo:?}: process={}", report.process_deviations);
    }
}
