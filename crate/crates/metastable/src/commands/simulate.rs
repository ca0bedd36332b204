use metastable_core::landscape::{graph_from_potential, AnalysisParams};
use metastable_core::sde::{default_valley_depth, SimConfig, ValleyMap};
use metastable_core::tree::build_hierarchy;
use serde_json::json;

use crate::cli::SimulateArgs;
use crate::commands::with_manifest;
use crate::manifest::Manifest;
use crate::simulation::{finite_or_null, histogram_check, parallel_transition_stats, stats_json, BURN_IN};
use crate::{load_potential, CliError, Outcome};

/// Accepted ratio of mean exit time to its prediction.
const TIME_FACTOR: f64 = 2.0;

/// Accepted total variation of the long-run histogram.
const HISTOGRAM_TV: f64 = 0.05;

/// Offset separating the histogram replicas' seed from the exit replicas'.
const HISTOGRAM_SEED_OFFSET: u64 = 1;

fn valley_nodes(dim: usize) -> usize {
    if dim == 1 {
        801
    } else {
        201
    }
}

pub fn run(args: &SimulateArgs, timing: bool) -> Result<Outcome, CliError> {
    let (u, spec, input) = load_potential(&args.potential)?;
    let config = SimConfig::new(args.eps, args.dt, args.horizon, args.replicas, args.seed)?;
    if matches!(args.histogram_bins, Some(0)) {
        return Err(CliError::argument("--histogram-bins must be positive"));
    }
    let a = graph_from_potential(&u, &AnalysisParams::default())?;
    let h = build_hierarchy(&a.graph)?;
    let level = h
        .level(args.level)
        .ok_or_else(|| CliError::argument(format!("--level {} exceeds q = {}", args.level, h.q())))?;
    let min = a
        .graph
        .find_minimum(&args.start)
        .ok_or_else(|| CliError::argument(format!("unknown minimum {:?}", args.start)))?;
    let start = level.metastable.iter().position(|s| s.contains(min)).ok_or_else(|| {
        CliError::argument(format!("{} is not in a metastable set of level {}", args.start, args.level))
    })?;
    let depth = args.valley_depth.unwrap_or_else(|| default_valley_depth(&h));
    let valleys = ValleyMap::new(&a, depth, valley_nodes(u.dim()))?;
    let config = config.with_valley_depth(depth)?;
    let stats = parallel_transition_stats(&a, &h, args.level, start, &valleys, &config)?;
    let time_ok = stats.exits > 0 && (1.0 / TIME_FACTOR..=TIME_FACTOR).contains(&stats.time_ratio);
    let mut body = json!({
        "start_set": h.level(args.level).map(|l| l.metastable[start].labels(&h.graph)),
        "sets": level.metastable.iter().map(|s| s.labels(&h.graph)).collect::<Vec<_>>(),
        "exit": stats_json(&stats),
        "checks": { "time_ratio_within_factor": time_ok, "factor": TIME_FACTOR },
    });
    let mut passed = time_ok;
    let mut settings = json!({
        "potential": spec,
        "eps": args.eps,
        "dt": args.dt,
        "horizon": args.horizon,
        "replicas": args.replicas,
        "seed": args.seed,
        "start": args.start,
        "level": args.level,
        "valley_depth": depth,
        "valley_nodes": valley_nodes(u.dim()),
    });
    if let Some(bins) = args.histogram_bins {
        let ground = a.graph.ground_height();
        let starts: Vec<Vec<f64>> = h
            .graph
            .minima()
            .iter()
            .enumerate()
            .filter(|(_, m)| (m.height - ground).abs() <= h.graph.height_tol())
            .map(|(i, _)| a.minimum_location(metastable_core::landscape::MinId(i)).to_vec())
            .collect();
        let long = SimConfig::new(
            args.eps,
            args.dt,
            args.histogram_horizon,
            args.replicas,
            args.seed + HISTOGRAM_SEED_OFFSET,
        )?;
        let check = histogram_check(&u, args.eps, bins, &long, &starts)?;
        let tv_ok = check.total_variation <= HISTOGRAM_TV;
        passed &= tv_ok;
        body["histogram"] = json!({
            "bins_per_axis": bins,
            "empirical": check.empirical.weights(),
            "reference": check.reference.weights(),
            "total_variation": finite_or_null(check.total_variation),
        });
        body["checks"]["histogram_tv_ok"] = json!(tv_ok);
        body["checks"]["histogram_tv_bound"] = json!(HISTOGRAM_TV);
        settings["histogram"] = json!({
            "bins_per_axis": bins,
            "horizon": args.histogram_horizon,
            "seed": args.seed + HISTOGRAM_SEED_OFFSET,
            "burn_in": BURN_IN,
            "starts": starts,
        });
    }
    body["checks"]["passed"] = json!(passed);
    let manifest = Manifest::new("simulate", input.into_iter().collect(), settings, timing);
    Ok(Outcome::new(with_manifest(manifest, body)?, passed))
}
