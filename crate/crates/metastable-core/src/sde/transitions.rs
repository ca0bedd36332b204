//! Exits from the valleys of one metastable set to those of the others,
//! compared with the reduced chain of the same level.

use alloc::vec;
use alloc::vec::Vec;

use super::{SdeError, SimConfig, Stepper, ValleyMap};
use crate::landscape::AnalyticLandscape;
use crate::tree::Hierarchy;

/// Outcome of one replica started at a minimum of the start set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaExit {
    pub replica: usize,
    /// Hitting time of the other sets' valleys, if reached before the
    /// horizon.
    pub time: Option<f64>,
    /// Index of the set whose valley was hit.
    pub target: Option<usize>,
    pub left_box: bool,
}

/// Exit statistics of a batch of replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionStats {
    pub level: usize,
    pub start: usize,
    pub replicas: usize,
    pub exits: usize,
    /// Replicas that reached the horizon without exiting.
    pub censored: usize,
    pub left_box: usize,
    pub mean_exit_time: f64,
    pub std_error: f64,
    /// `e^{d/ε}` divided by the total exit rate of the start set.
    pub predicted_time: f64,
    /// `mean_exit_time / predicted_time`.
    pub time_ratio: f64,
    /// Hit frequencies of every set of the level.
    pub frequencies: Vec<f64>,
    /// Jump probabilities of the embedded chain from the start set.
    pub expected_frequencies: Vec<f64>,
}

/// Valley indices (into the map) of every metastable set of level `p`.
fn set_valleys(h: &Hierarchy, p: usize) -> Result<Vec<Vec<usize>>, SdeError> {
    let level = h.level(p).ok_or_else(|| SdeError::InvalidInput(alloc::format!("no level {p}")))?;
    Ok(level.metastable.iter().map(|set| set.members().iter().map(|m| m.0).collect()).collect())
}

/// Runs one replica from the first minimum of set `start` until it enters
/// the valley of another set of level `p`.
pub fn exit_replica(
    landscape: &AnalyticLandscape,
    h: &Hierarchy,
    p: usize,
    start: usize,
    valleys: &ValleyMap,
    config: &SimConfig,
    replica: usize,
) -> Result<ReplicaExit, SdeError> {
    config.validate()?;
    let sets = set_valleys(h, p)?;
    let origin = sets
        .get(start)
        .and_then(|s| s.first())
        .copied()
        .ok_or_else(|| SdeError::InvalidInput(alloc::format!("level {p} has no metastable set {start}")))?;
    let others: Vec<(usize, usize)> = sets
        .iter()
        .enumerate()
        .filter(|&(s, _)| s != start)
        .flat_map(|(s, vs)| vs.iter().map(move |&v| (v, s)))
        .collect();
    let candidates: Vec<usize> = others.iter().map(|&(v, _)| v).collect();
    let mut x = valleys.valleys[origin].location.clone();
    let mut stepper = Stepper::new(&landscape.potential, config, replica);
    for k in 1..=config.steps() {
        if !stepper.step(&mut x) {
            return Ok(ReplicaExit { replica, time: None, target: None, left_box: true });
        }
        if let Some(v) = valleys.locate(&candidates, &x) {
            let target = others.iter().find(|&&(w, _)| w == v).map(|&(_, s)| s);
            return Ok(ReplicaExit { replica, time: Some(k as f64 * config.dt), target, left_box: false });
        }
    }
    Ok(ReplicaExit { replica, time: None, target: None, left_box: false })
}

/// Aggregates replica outcomes (in replica order) against the level-`p`
/// predictions.
pub fn summarize_exits(
    h: &Hierarchy,
    p: usize,
    start: usize,
    config: &SimConfig,
    outcomes: &[ReplicaExit],
) -> Result<TransitionStats, SdeError> {
    let level = h.level(p).ok_or_else(|| SdeError::InvalidInput(alloc::format!("no level {p}")))?;
    let n = level.metastable.len();
    if start >= n {
        return Err(SdeError::InvalidInput(alloc::format!("level {p} has no metastable set {start}")));
    }
    let times: Vec<f64> = outcomes.iter().filter_map(|o| o.time).collect();
    let exits = times.len();
    let mean = times.iter().sum::<f64>() / exits as f64;
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (exits as f64 - 1.0);
    let mut hits = vec![0usize; n];
    for t in outcomes.iter().filter_map(|o| o.target) {
        hits[t] += 1;
    }
    let frequencies = hits.iter().map(|&c| c as f64 / exits as f64).collect();
    let out = level.chain.out_rate(start);
    let expected_frequencies =
        (0..n).map(|s| if s == start || out == 0.0 { 0.0 } else { level.chain.rate(start, s) / out }).collect();
    let predicted_time = libm::exp(level.depth / config.eps) / out;
    Ok(TransitionStats {
        level: p,
        start,
        replicas: outcomes.len(),
        exits,
        censored: outcomes.iter().filter(|o| o.time.is_none() && !o.left_box).count(),
        left_box: outcomes.iter().filter(|o| o.left_box).count(),
        mean_exit_time: mean,
        std_error: libm::sqrt(var / exits as f64),
        predicted_time,
        time_ratio: mean / predicted_time,
        frequencies,
        expected_frequencies,
    })
}

/// Runs all replicas sequentially and summarizes them.
pub fn transition_stats(
    landscape: &AnalyticLandscape,
    h: &Hierarchy,
    p: usize,
    start: usize,
    valleys: &ValleyMap,
    config: &SimConfig,
) -> Result<TransitionStats, SdeError> {
    let outcomes = (0..config.replicas)
        .map(|r| exit_replica(landscape, h, p, start, valleys, config, r))
        .collect::<Result<Vec<_>, _>>()?;
    summarize_exits(h, p, start, config, &outcomes)
}
