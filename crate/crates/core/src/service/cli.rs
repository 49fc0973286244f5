//! The `patternbench` command.
//!
//! Exit codes: 0 success, 1 invalid model or failed operation, 2 unreadable
//! or unparsable input, 3 state budget exhausted.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{
    analyze_session, distance, AnalysisError, CountingMode, DeviationOptions, DistanceOptions, RegionMap,
    UndoCounting,
};
use crate::graph::{check_soundness, to_graph, FlatGraph, GraphNodeKind, SoundnessReport};
use crate::model::{canonicalize, serialize, Condition, Label, ModelError, ProcessModel};
use crate::patterns::{applicable_patterns, apply_pattern, Alphabet, PatternInstance};
use crate::session::{replay_states, SessionLog};

use super::parse_model;

pub const STATE_BUDGET_ENV: &str = "PATTERNBENCH_STATE_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "patternbench", version, about = "Change-pattern modeling sessions and their analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a model parses, satisfies the model invariants and is sound.
    Validate { model: PathBuf },
    /// Apply one pattern and print the resulting model document.
    Apply {
        model: PathBuf,
        /// Pattern as JSON, or `@file`.
        pattern: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the patterns applicable to a model.
    Applicable {
        model: PathBuf,
        /// Insertable labels; defaults to the model's own.
        #[arg(long, value_delimiter = ',')]
        alphabet: Vec<String>,
        /// Condition expressions offered for updates.
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<String>,
    },
    /// Replay a session log.
    Replay {
        log: PathBuf,
        /// Number of events to replay; all by default.
        #[arg(long)]
        step: Option<usize>,
        /// Print the digest after every event instead.
        #[arg(long)]
        digests: bool,
        /// Print the model as a JSON document.
        #[arg(long)]
        json: bool,
    },
    /// Minimal number of patterns between two models.
    Distance {
        /// Start from the empty model; then only the target is given.
        #[arg(long)]
        empty: bool,
        /// `[SOURCE] TARGET`.
        #[arg(required = true, num_args = 1..=2)]
        models: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        alphabet: Vec<String>,
        /// Optimal paths to list.
        #[arg(long, default_value_t = 10)]
        enumerate: usize,
        #[arg(long, env = STATE_BUDGET_ENV, default_value_t = crate::analysis::DEFAULT_STATE_BUDGET)]
        state_budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// Process and product deviations of a session against a solution.
    Analyze {
        log: PathBuf,
        solution: PathBuf,
        regions: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::StateChangingOnly)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Undo::Twice)]
        undo: Undo,
        /// Write the full report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, env = STATE_BUDGET_ENV, default_value_t = crate::analysis::DEFAULT_STATE_BUDGET)]
        state_budget: usize,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Static files for the editor.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Write every session log here as `<id>.jsonl`.
        #[arg(long)]
        session_dir: Option<PathBuf>,
        #[arg(long, env = STATE_BUDGET_ENV, default_value_t = crate::analysis::DEFAULT_STATE_BUDGET)]
        state_budget: usize,
    },
    /// Print the flat graph of a model.
    ExportGraph {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    StateChangingOnly,
    IncludeFailed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Undo {
    Net,
    Once,
    Twice,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug)]
enum Failure {
    /// Exit 1.
    Invalid(String),
    /// Exit 2.
    Input(String),
    /// Exit 3.
    Budget(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(message) | Failure::Input(message) | Failure::Budget(message) => message,
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(error: AnalysisError) -> Failure {
        match error {
            AnalysisError::BudgetExceeded { .. } => Failure::Budget(error.to_string()),
            AnalysisError::Session(_) | AnalysisError::Region(..) => Failure::Input(error.to_string()),
            _ => Failure::Invalid(error.to_string()),
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(error) => {
            let code = if error.use_stderr() { 2 } else { 0 };
            let text = error.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Apply { model, pattern, out } => apply(&model, &pattern, out.as_deref()),
        Command::Applicable { model, alphabet, conditions } => applicable(&model, &alphabet, &conditions),
        Command::Replay { log, step, digests, json } => replay(&log, step, digests, json),
        Command::Distance { empty, models, alphabet, enumerate, state_budget, json } => {
            run_distance(empty, &models, &alphabet, enumerate, state_budget, json)
        }
        Command::Analyze { log, solution, regions, mode, undo, report, state_budget } => {
            analyze(&log, &solution, regions.as_deref(), mode, undo, report.as_deref(), state_budget)
        }
        Command::Serve { port, host, static_dir, session_dir, state_budget } => {
            serve(&host, port, static_dir, session_dir, state_budget, out)
        }
        Command::ExportGraph { model, format } => export_graph(&model, format),
    };
    match result {
        Ok(Report { text, code }) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message());
            failure.code()
        }
    }
}

/// Output of a command that ran to the end.
struct Report {
    text: String,
    code: i32,
}

impl Report {
    fn ok(text: String) -> Result<Report, Failure> {
        Ok(Report { text, code: 0 })
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|error| Failure::Input(format!("{}: {error}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|error| Failure::Input(format!("{}: {error}", path.display())))
}

fn load_model(path: &Path) -> Result<ProcessModel, Failure> {
    parse_model(&read(path)?).map_err(|error| match error {
        ModelError::Parse { .. } => Failure::Input(format!("{}: {error}", path.display())),
        ModelError::InvariantViolation(_) => Failure::Invalid(format!("{}: {error}", path.display())),
    })
}

fn load_log(path: &Path) -> Result<SessionLog, Failure> {
    SessionLog::from_jsonl(&read(path)?).map_err(|error| Failure::Input(format!("{}: {error}", path.display())))
}

fn labels(names: &[String]) -> Result<Vec<Label>, Failure> {
    names
        .iter()
        .map(|name| Label::new(name).ok_or_else(|| Failure::Input(format!("invalid label {name:?}"))))
        .collect()
}

fn describe_soundness(report: &SoundnessReport, text: &mut String) {
    for finding in &report.violations {
        let _ = writeln!(text, "violation {:?}: {}", finding.code, finding.message);
    }
    for finding in &report.warnings {
        let _ = writeln!(text, "warning {:?}: {}", finding.code, finding.message);
    }
}

fn validate(path: &Path) -> Result<Report, Failure> {
    let text = read(path)?;
    let model = match parse_model(&text) {
        Ok(model) => model,
        Err(ModelError::InvariantViolation(violations)) => {
            let mut text = String::from("valid: no\n");
            for violation in violations {
                let _ = writeln!(text, "violation {violation}");
            }
            return Ok(Report { text, code: 1 });
        }
        Err(error) => return Err(Failure::Input(format!("{}: {error}", path.display()))),
    };
    let soundness = check_soundness(&to_graph(&model));
    let mut text = String::new();
    let _ = writeln!(text, "valid: {}", if soundness.sound { "yes" } else { "no" });
    let _ = writeln!(text, "model: {model}");
    let _ = writeln!(text, "activities: {}", model.activity_count());
    let _ = writeln!(text, "digest: {}", canonicalize(&model).digest);
    describe_soundness(&soundness, &mut text);
    Ok(Report { text, code: if soundness.sound { 0 } else { 1 } })
}

fn apply(path: &Path, pattern: &str, out: Option<&Path>) -> Result<Report, Failure> {
    let model = load_model(path)?;
    let json = match pattern.strip_prefix('@') {
        Some(file) => read(Path::new(file))?,
        None => pattern.to_string(),
    };
    let pattern: PatternInstance =
        serde_json::from_str(&json).map_err(|error| Failure::Input(format!("pattern: {error}")))?;
    let after = apply_pattern(&model, &pattern).map_err(|error| Failure::Invalid(error.to_string()))?;
    let document = serialize(&after) + "\n";
    match out {
        Some(out) => {
            write(out, &document)?;
            Report::ok(format!("{after}\n"))
        }
        None => Report::ok(document),
    }
}

fn applicable(path: &Path, alphabet: &[String], conditions: &[String]) -> Result<Report, Failure> {
    let model = load_model(path)?;
    let labels = if alphabet.is_empty() { model.activities() } else { labels(alphabet)? };
    let alphabet = Alphabet::new(labels).with_conditions(conditions.iter().map(|text| Condition::expr(text.as_str())));
    let found = applicable_patterns(&model, Some(&alphabet));
    Report::ok(serde_json::to_string_pretty(&found).expect("patterns serialize") + "\n")
}

fn replay(path: &Path, step: Option<usize>, digests: bool, json: bool) -> Result<Report, Failure> {
    let log = load_log(path)?;
    let states = replay_states(&log).map_err(|error| Failure::Input(error.to_string()))?;
    let mut text = String::new();
    if digests {
        for (index, state) in states.iter().enumerate() {
            let _ = writeln!(text, "{index} {}", canonicalize(state).digest);
        }
        return Report::ok(text);
    }
    let step = step.unwrap_or(log.len());
    let state = states
        .get(step)
        .ok_or_else(|| Failure::Input(format!("step {step} is past the end of a log with {} events", log.len())))?;
    if json {
        return Report::ok(serialize(state) + "\n");
    }
    let _ = writeln!(text, "step: {step}/{}", log.len());
    let _ = writeln!(text, "model: {state}");
    let _ = writeln!(text, "digest: {}", canonicalize(state).digest);
    Report::ok(text)
}

fn run_distance(
    empty: bool,
    models: &[PathBuf],
    alphabet: &[String],
    enumerate: usize,
    state_budget: usize,
    json: bool,
) -> Result<Report, Failure> {
    let (source, target) = match (empty, models) {
        (true, [target]) => (ProcessModel::new_empty(), load_model(target)?),
        (false, [source, target]) => (load_model(source)?, load_model(target)?),
        (true, _) => return Err(Failure::Input("--empty takes exactly one model, the target".into())),
        (false, _) => return Err(Failure::Input("expected SOURCE and TARGET, or --empty TARGET".into())),
    };
    let alphabet = match alphabet {
        [] => Alphabet::of_model(&target),
        names => Alphabet::new(labels(names)?).with_conditions(target.condition_vocabulary()),
    };
    let options = DistanceOptions { enumerate_limit: enumerate, state_budget };
    let result = distance(&source, &target, &alphabet, &options)?;
    if json {
        let value = serde_json::json!({
            "d": result.d,
            "explored_states": result.explored_states,
            "path_count": result.path_count,
            "truncated": result.truncated,
            "optimal_paths": result.optimal_paths,
        });
        return Report::ok(serde_json::to_string_pretty(&value).expect("results serialize") + "\n");
    }
    let mut text = String::new();
    let _ = writeln!(text, "d={}", result.d);
    let _ = writeln!(text, "explored={}", result.explored_states);
    let _ = writeln!(text, "optimal_paths={} listed={}", result.path_count, result.optimal_paths.len());
    for (index, path) in result.optimal_paths.iter().enumerate() {
        let steps: Vec<String> = path.iter().map(ToString::to_string).collect();
        let _ = writeln!(text, "{}: {}", index + 1, steps.join(" ; "));
    }
    Report::ok(text)
}

fn analyze(
    log: &Path,
    solution: &Path,
    regions: Option<&Path>,
    mode: Mode,
    undo: Undo,
    report: Option<&Path>,
    state_budget: usize,
) -> Result<Report, Failure> {
    let log = load_log(log)?;
    let solution = load_model(solution)?;
    let regions = match regions {
        Some(path) => Some(RegionMap::from_json(&read(path)?)?),
        None => None,
    };
    let options = DeviationOptions {
        mode: match mode {
            Mode::StateChangingOnly => CountingMode::StateChangingOnly,
            Mode::IncludeFailed => CountingMode::IncludeFailed,
        },
        undo: match undo {
            Undo::Net => UndoCounting::Net,
            Undo::Once => UndoCounting::Once,
            Undo::Twice => UndoCounting::Twice,
        },
        distance: DistanceOptions { enumerate_limit: 1, state_budget },
    };
    let analysis = analyze_session(&log, &solution, regions.as_ref(), &options)?;
    if let Some(path) = report {
        write(path, &(analysis.to_json() + "\n"))?;
    }
    let mut text = String::new();
    let _ = writeln!(
        text,
        "process={} product={} dead_ends={}",
        analysis.process_deviations,
        analysis.product_deviations,
        analysis.dead_end_steps.len()
    );
    for (region, counts) in &analysis.per_region {
        let _ = writeln!(text, "region {region}: process={} product={}", counts.process, counts.product);
    }
    Report::ok(text)
}

fn serve(
    host: &str,
    port: u16,
    static_dir: Option<PathBuf>,
    session_dir: Option<PathBuf>,
    state_budget: usize,
    out: &mut dyn Write,
) -> Result<Report, Failure> {
    let addr: SocketAddr =
        format!("{host}:{port}").parse().map_err(|error| Failure::Input(format!("address {host}:{port}: {error}")))?;
    if let Some(dir) = &session_dir {
        std::fs::create_dir_all(dir).map_err(|error| Failure::Input(format!("{}: {error}", dir.display())))?;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|error| Failure::Invalid(error.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|error| Failure::Input(format!("bind {addr}: {error}")))?;
        let bound = listener.local_addr().map_err(|error| Failure::Invalid(error.to_string()))?;
        let _ = writeln!(out, "listening on http://{bound}");
        let _ = out.flush();
        let config = super::http::Config { static_dir, session_dir, state_budget };
        super::http::serve(listener, config).await.map_err(|error| Failure::Invalid(error.to_string()))
    })?;
    Report::ok(String::new())
}

fn export_graph(path: &Path, format: GraphFormat) -> Result<Report, Failure> {
    let graph = to_graph(&load_model(path)?);
    match format {
        GraphFormat::Json => Report::ok(serde_json::to_string_pretty(&graph).expect("graphs serialize") + "\n"),
        GraphFormat::Dot => Report::ok(to_dot(&graph)),
    }
}

/// Graphviz rendering, left to right.
pub fn to_dot(graph: &FlatGraph) -> String {
    let mut text = String::from("digraph model {\n  rankdir=LR;\n");
    for node in graph.nodes() {
        let (label, shape) = match &node.kind {
            GraphNodeKind::Start => ("start".to_string(), "circle"),
            GraphNodeKind::End => ("end".to_string(), "doublecircle"),
            GraphNodeKind::Activity { label } => (label.as_str().to_string(), "box"),
            GraphNodeKind::AndSplit | GraphNodeKind::AndJoin => ("+".to_string(), "diamond"),
            GraphNodeKind::XorSplit | GraphNodeKind::XorJoin => ("x".to_string(), "diamond"),
        };
        let _ = writeln!(text, "  n{} [label={:?}, shape={shape}];", node.id.0, label);
    }
    for edge in graph.edges() {
        match &edge.condition {
            Some(condition) => {
                let _ = writeln!(text, "  n{} -> n{} [label={:?}];", edge.from.0, edge.to.0, condition.to_string());
            }
            None => {
                let _ = writeln!(text, "  n{} -> n{};", edge.from.0, edge.to.0);
            }
        }
    }
    text.push_str("}\n");
    text
}
