use metastable_core::landscape::{AnalysisParams, CriticalKind, CriticalPoint};
use serde_json::{json, Value};

use crate::cli::AnalyzeArgs;
use crate::commands::with_manifest;
use crate::io::GraphFile;
use crate::manifest::Manifest;
use crate::{load_landscape, CliError, Landscape, Outcome};

fn kind_name(kind: &CriticalKind) -> String {
    match kind {
        CriticalKind::Minimum => "minimum".into(),
        CriticalKind::Saddle => "saddle".into(),
        CriticalKind::HigherIndex(k) => format!("index_{k}"),
    }
}

fn point_json(p: &CriticalPoint) -> Value {
    json!({
        "location": p.location,
        "value": p.value,
        "index": p.index,
        "kind": kind_name(&p.kind),
        "eigenvalues": p.eigenvalues,
    })
}

pub fn run(args: &AnalyzeArgs, timing: bool) -> Result<Outcome, CliError> {
    let mut params = AnalysisParams::default();
    if let Some(seeds) = args.seeds {
        if seeds < 2 {
            return Err(CliError::argument("--seeds must be at least 2"));
        }
        params.search.grid_n = seeds;
    }
    let (landscape, mut settings, inputs) =
        load_landscape(args.source.potential.as_deref(), args.source.graph.as_deref(), &params)?;
    let graph = GraphFile::from_graph(landscape.graph());
    let body = match &landscape {
        Landscape::Analytic(a) => {
            settings["seeds_per_axis"] = json!(params.search.grid_n);
            settings["morse_tol"] = json!(params.search.morse_tol);
            let points: Vec<Value> = a.catalog.points.iter().map(point_json).collect();
            json!({
                "critical_points": points,
                "skipped_seeds": a.catalog.skipped_seeds,
                "minimum_points": a.minimum_points,
                "saddle_points": a.saddle_points,
                "graph": graph,
            })
        }
        Landscape::Graph(_) => json!({ "graph": graph }),
    };
    let manifest = Manifest::new("analyze", inputs, settings, timing);
    Ok(Outcome::new(with_manifest(manifest, body)?, true))
}
