use metastable_core::gamma::{expansion_report, GammaValue, LevelValue, TimeScale};
use metastable_core::landscape::AnalysisParams;
use metastable_core::tree::build_hierarchy;
use serde_json::{json, Value};

use crate::cli::GammaArgs;
use crate::commands::with_manifest;
use crate::io::{read_json, MeasureFile};
use crate::manifest::{InputRecord, Manifest};
use crate::{load_landscape, CliError, Outcome};

fn scale_json(scale: TimeScale) -> Value {
    match scale {
        TimeScale::Epsilon => json!({ "kind": "epsilon" }),
        TimeScale::Unit => json!({ "kind": "unit" }),
        TimeScale::Exponential { depth } => json!({ "kind": "exponential", "depth": depth }),
    }
}

/// Infinite values are `null` with a reason.
fn level_json(l: &LevelValue) -> Value {
    let (value, reason) = match l.value {
        GammaValue::Finite(v) => (json!(v), Value::Null),
        GammaValue::Infinite(r) => (Value::Null, json!(r.to_string())),
    };
    json!({ "order": l.order, "scale": scale_json(l.scale), "value": value, "infinite_reason": reason })
}

pub fn run(args: &GammaArgs, timing: bool) -> Result<Outcome, CliError> {
    if args.eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(CliError::argument("--eps-list needs positive finite temperatures"));
    }
    if !(args.match_tol > 0.0) {
        return Err(CliError::argument("--match-tol must be positive"));
    }
    let (landscape, mut settings, mut inputs) =
        load_landscape(args.source.potential.as_deref(), args.source.graph.as_deref(), &AnalysisParams::default())?;
    let h = build_hierarchy(landscape.graph())?;
    if let Some(p) = args.level {
        if p > h.q() {
            return Err(CliError::argument(format!("--level {p} exceeds q = {}", h.q())));
        }
    }
    let (file, bytes): (MeasureFile, _) = read_json(&args.measure)?;
    inputs.push(InputRecord::new(&args.measure, &bytes));
    let mu = file.build(landscape.graph())?;
    let report = expansion_report(&h, landscape.analytic(), &mu, args.match_tol, &args.eps_list)?;
    settings["measure"] = json!(args.measure.display().to_string());
    settings["eps_list"] = json!(args.eps_list);
    settings["match_tol"] = json!(args.match_tol);
    settings["level"] = json!(args.level);
    let levels: Vec<Value> = report.levels.iter().map(level_json).collect();
    let reconstruction: Vec<Value> =
        report.reconstruction.iter().map(|&(eps, v)| json!({ "eps": eps, "value": v })).collect();
    let mut body = json!({
        "q": h.q(),
        "levels": levels,
        "leading_order": report.leading.map(|i| report.levels[i].order),
        "reconstruction": reconstruction,
    });
    if let Some(p) = args.level {
        let order = p as i64;
        body["selected"] = report.levels.iter().find(|l| l.order == order).map(level_json).unwrap_or(Value::Null);
    }
    let manifest = Manifest::new("gamma", inputs, settings, timing);
    Ok(Outcome::new(with_manifest(manifest, body)?, true))
}
