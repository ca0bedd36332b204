//! Replica-parallel drivers around the sequential simulator.

use metastable_core::chain::StateMeasure;
use metastable_core::landscape::{AnalyticLandscape, Potential};
use metastable_core::sde::{
    empirical_histogram, exit_replica, gibbs_bin_masses, simulate_path, summarize_exits, HistogramBins, SamplePath,
    SimConfig, TransitionStats, ValleyMap,
};
use metastable_core::tree::Hierarchy;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::CliError;

/// Bins per axis subdivided for the reference masses.
const REFERENCE_SUBDIVISION: usize = 50;

/// Samples kept per unit of simulated time in long runs.
const LONG_RUN_THIN: usize = 10;

/// Burn-in dropped from each long run before pooling.
pub const BURN_IN: f64 = 5.0;

/// Exit statistics with replicas run in parallel; identical to the
/// sequential result because each replica owns its random stream.
pub fn parallel_transition_stats(
    landscape: &AnalyticLandscape,
    h: &Hierarchy,
    p: usize,
    start: usize,
    valleys: &ValleyMap,
    config: &SimConfig,
) -> Result<TransitionStats, CliError> {
    let outcomes = (0..config.replicas)
        .into_par_iter()
        .map(|r| exit_replica(landscape, h, p, start, valleys, config, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize_exits(h, p, start, config, &outcomes)?)
}

/// Long runs whose starting points cycle through `starts`.
pub fn parallel_long_runs(u: &Potential, config: &SimConfig, starts: &[Vec<f64>]) -> Result<Vec<SamplePath>, CliError> {
    if starts.is_empty() {
        return Err(CliError::argument("long runs need at least one starting point"));
    }
    Ok((0..config.replicas)
        .into_par_iter()
        .map(|r| simulate_path(u, config, &starts[r % starts.len()], r))
        .collect::<Result<Vec<_>, _>>()?)
}

/// Pooled occupation histogram of long runs and its distance to the
/// quadrature Gibbs masses of the same bins.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramCheck {
    pub empirical: StateMeasure,
    pub reference: StateMeasure,
    pub total_variation: f64,
}

pub fn histogram_check(
    u: &Potential,
    eps: f64,
    per_axis: usize,
    config: &SimConfig,
    starts: &[Vec<f64>],
) -> Result<HistogramCheck, CliError> {
    let config = config.clone().with_thin(LONG_RUN_THIN)?;
    let bins = HistogramBins::new(u.bounds().clone(), per_axis)?;
    let reference = gibbs_bin_masses(u, eps, &bins, REFERENCE_SUBDIVISION)?;
    let paths = parallel_long_runs(u, &config, starts)?;
    let empirical = empirical_histogram(&paths, &bins, BURN_IN)?;
    let total_variation = empirical.total_variation(&reference);
    Ok(HistogramCheck { empirical, reference, total_variation })
}

pub fn stats_json(stats: &TransitionStats) -> Value {
    json!({
        "level": stats.level,
        "start": stats.start,
        "replicas": stats.replicas,
        "exits": stats.exits,
        "censored": stats.censored,
        "left_box": stats.left_box,
        "mean_exit_time": finite_or_null(stats.mean_exit_time),
        "std_error": finite_or_null(stats.std_error),
        "predicted_time": finite_or_null(stats.predicted_time),
        "time_ratio": finite_or_null(stats.time_ratio),
        "frequencies": stats.frequencies.iter().map(|&f| finite_or_null(f)).collect::<Vec<_>>(),
        "expected_frequencies": stats.expected_frequencies,
    })
}

/// JSON has no infinities or NaN; those become `null`.
pub fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
