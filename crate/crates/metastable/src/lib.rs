//! Command-line driver for metastable hierarchy analysis: file formats,
//! run manifests, sweep and replica drivers, and the subcommands.

pub mod cli;
pub mod commands;
mod error;
pub mod io;
pub mod manifest;
pub mod simulation;
pub mod sweep;

use std::io::Write;
use std::path::Path;

use metastable_core::landscape::{graph_from_potential, AnalysisParams, AnalyticLandscape, LandscapeGraph, Potential};
use serde_json::Value;

pub use error::CliError;

use cli::{Cli, Command, Format};
use io::{read_json, GraphFile, PotentialSpec};
use manifest::InputRecord;

/// Whether the run's checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
}

/// The result of a command: a JSON document, an optional CSV rendering and
/// the check status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: Value,
    pub csv: Option<String>,
    pub status: Status,
}

impl Outcome {
    pub fn new(json: Value, passed: bool) -> Self {
        Self { json, csv: None, status: if passed { Status::Success } else { Status::CheckFailed } }
    }
}

/// Exit code for a finished run: 0 success, 1 failed check, 2 input error.
pub fn exit_code(result: &Result<Outcome, CliError>) -> i32 {
    match result {
        Ok(Outcome { status: Status::Success, .. }) => 0,
        Ok(Outcome { status: Status::CheckFailed, .. }) => 1,
        Err(_) => 2,
    }
}

/// A potential given as `builtin:NAME` or as a spec file.
pub fn load_potential(arg: &str) -> Result<(Potential, Value, Option<InputRecord>), CliError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        let spec = PotentialSpec::builtin(name);
        return Ok((spec.build()?, serde_json::to_value(&spec)?, None));
    }
    let path = Path::new(arg);
    let (spec, bytes): (PotentialSpec, _) = read_json(path)?;
    Ok((spec.build()?, serde_json::to_value(&spec)?, Some(InputRecord::new(path, &bytes))))
}

pub fn load_graph(path: &Path) -> Result<(LandscapeGraph, InputRecord), CliError> {
    let (file, bytes): (GraphFile, _) = read_json(path)?;
    Ok((file.build()?, InputRecord::new(path, &bytes)))
}

/// A landscape from either source; graph files carry no potential.
pub enum Landscape {
    Analytic(Box<AnalyticLandscape>),
    Graph(LandscapeGraph),
}

impl Landscape {
    pub fn graph(&self) -> &LandscapeGraph {
        match self {
            Landscape::Analytic(a) => &a.graph,
            Landscape::Graph(g) => g,
        }
    }

    pub fn analytic(&self) -> Option<&AnalyticLandscape> {
        match self {
            Landscape::Analytic(a) => Some(a),
            Landscape::Graph(_) => None,
        }
    }
}

pub fn load_landscape(
    potential: Option<&str>,
    graph: Option<&Path>,
    params: &AnalysisParams,
) -> Result<(Landscape, Value, Vec<InputRecord>), CliError> {
    match (potential, graph) {
        (Some(arg), None) => {
            let (u, spec, input) = load_potential(arg)?;
            let a = graph_from_potential(&u, params)?;
            Ok((
                Landscape::Analytic(Box::new(a)),
                serde_json::json!({ "potential": spec }),
                input.into_iter().collect(),
            ))
        }
        (None, Some(path)) => {
            let (g, input) = load_graph(path)?;
            Ok((Landscape::Graph(g), serde_json::json!({ "graph": path.display().to_string() }), vec![input]))
        }
        _ => Err(CliError::argument("exactly one of --potential and --graph is required")),
    }
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let timing = !cli.no_timing;
    match &cli.command {
        Command::Analyze(args) => commands::analyze::run(args, timing),
        Command::Tree(args) => commands::tree::run(args, timing),
        Command::Gamma(args) => commands::gamma::run(args, timing),
        Command::Verify(args) => commands::verify::run(args, timing),
        Command::Simulate(args) => commands::simulate::run(args, timing),
        Command::Chain(args) => commands::chain::run(args, timing),
    }
}

/// Writes the outcome to `out` (`-` for standard output) in the requested
/// or inferred format.
pub fn write_outcome(outcome: &Outcome, out: &str, format: Option<Format>) -> Result<(), CliError> {
    let format = format.unwrap_or(if out.ends_with(".csv") { Format::Csv } else { Format::Json });
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            outcome.csv.clone().ok_or_else(|| CliError::argument("csv output is only available for verify"))?
        }
    };
    let write_err = |source| CliError::Write { path: out.to_string(), source };
    if out == "-" {
        std::io::stdout().lock().write_all(text.as_bytes()).map_err(write_err)
    } else {
        std::fs::write(out, text).map_err(write_err)
    }
}
