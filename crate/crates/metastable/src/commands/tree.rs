use std::path::Path;

use metastable_core::landscape::AnalysisParams;
use metastable_core::tree::{
    build_hierarchy, check_hierarchy, check_local_reversibility, Hierarchy, REVERSIBILITY_RESIDUAL,
};
use serde_json::{json, Value};

use crate::cli::TreeArgs;
use crate::commands::with_manifest;
use crate::io::{read_json, HierarchyFile};
use crate::manifest::{InputRecord, Manifest};
use crate::{load_landscape, CliError, Outcome};

fn load_hierarchy(path: &Path) -> Result<(Hierarchy, InputRecord), CliError> {
    let (file, bytes): (HierarchyFile, _) = read_json(path)?;
    Ok((file.build()?, InputRecord::new(path, &bytes)))
}

/// Structural invariants plus the per-level reversibility residuals.
fn check_json(h: &Hierarchy) -> (Value, bool) {
    let failures = check_hierarchy(h);
    let residuals: Vec<f64> =
        h.levels
            .iter()
            .map(|l| {
                if l.metastable.len() == l.chain.len() {
                    check_local_reversibility(l, &h.graph)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
    let passed = failures.is_empty() && residuals.iter().all(|&r| r <= REVERSIBILITY_RESIDUAL);
    let failures: Vec<Value> =
        failures.iter().map(|f| json!({ "invariant": f.invariant, "level": f.level, "detail": f.detail })).collect();
    let residuals: Vec<Value> = residuals.iter().map(|&r| crate::simulation::finite_or_null(r)).collect();
    (
        json!({
            "passed": passed,
            "failures": failures,
            "reversibility_residuals": residuals,
            "reversibility_bound": REVERSIBILITY_RESIDUAL,
        }),
        passed,
    )
}

pub fn run(args: &TreeArgs, timing: bool) -> Result<Outcome, CliError> {
    let source = &args.source;
    let (h, mut settings, inputs) = match &source.hierarchy {
        Some(path) => {
            let (h, input) = load_hierarchy(path)?;
            (h, json!({ "hierarchy": path.display().to_string() }), vec![input])
        }
        None => {
            let (landscape, settings, inputs) =
                load_landscape(source.potential.as_deref(), source.graph.as_deref(), &AnalysisParams::default())?;
            (build_hierarchy(landscape.graph())?, settings, inputs)
        }
    };
    settings["check"] = json!(args.check);
    let file = HierarchyFile::from_hierarchy(&h);
    let mut body = json!({ "q": h.q(), "depths": h.depths(), "hierarchy": file });
    let mut passed = true;
    if args.check {
        let (check, ok) = check_json(&h);
        for failure in check["failures"].as_array().into_iter().flatten() {
            log::error!(
                "invariant {} failed at level {}: {}",
                failure["invariant"],
                failure["level"],
                failure["detail"]
            );
        }
        body["check"] = check;
        passed = ok;
    }
    let manifest = Manifest::new("tree", inputs, settings, timing);
    Ok(Outcome::new(with_manifest(manifest, body)?, passed))
}
