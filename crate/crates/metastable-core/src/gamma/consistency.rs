//! Randomized checks of the finiteness and zero-set relations between orders.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{j_level, GammaError, GammaValue, InfiniteReason};
use crate::chain::StateMeasure;
use crate::synthetic::random_probability;
use crate::tree::{level_stationaries, pi_measure, Hierarchy, TreeLevel};

/// Values at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// Number of generated measures.
    pub measures: usize,
    /// The unique measure on which the top-order functional vanishes.
    pub top_zero: Vec<f64>,
    pub failures: Vec<String>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// A combination of the level's `π_M`.
    OnSupport,
    /// A combination of the level's class stationaries.
    Stationary,
    /// Within-set ratios moved away from `π_M`.
    RatioPerturbed,
    /// Some mass on an absorbed set.
    OffSupport,
}

const KINDS: [Kind; 4] = [Kind::OnSupport, Kind::Stationary, Kind::RatioPerturbed, Kind::OffSupport];

fn combine(h: &Hierarchy, sets: &[(&crate::tree::MinSet, f64)]) -> Vec<f64> {
    let mut w = vec![0.0; h.graph.min_count()];
    for (set, coef) in sets {
        for (a, b) in w.iter_mut().zip(pi_measure(&h.graph, set).weights()) {
            *a += coef * b;
        }
    }
    w
}

fn on_support<R: Rng + ?Sized>(rng: &mut R, h: &Hierarchy, level: &TreeLevel) -> Vec<f64> {
    let omega = random_probability(rng, level.metastable.len());
    combine(h, &level.metastable.iter().zip(omega).collect::<Vec<_>>())
}

fn stationary<R: Rng + ?Sized>(rng: &mut R, h: &Hierarchy, level: &TreeLevel) -> Vec<f64> {
    let stat = level_stationaries(level, &h.graph);
    let coefs = random_probability(rng, stat.len());
    let mut parts = Vec::new();
    for ((class, nu), c) in level.classes.recurrent().zip(&stat).zip(coefs) {
        for (&i, w) in class.states.iter().zip(nu) {
            parts.push((&level.metastable[i], c * w));
        }
    }
    combine(h, &parts)
}

/// Moves a quarter of the remaining mass of `set` onto `group`.
fn shift_toward(w: &mut [f64], set: &[usize], group: &[usize]) {
    let total: f64 = set.iter().map(|&m| w[m]).sum();
    let inside: f64 = group.iter().map(|&m| w[m]).sum();
    let a = inside / total;
    let target = a + (1.0 - a) / 4.0;
    for &m in set {
        w[m] *= if group.contains(&m) { target / a } else { (1.0 - target) / (1.0 - a) };
    }
}

fn ratio_perturbed<R: Rng + ?Sized>(
    rng: &mut R,
    h: &Hierarchy,
    level: &TreeLevel,
    prev: Option<&TreeLevel>,
) -> Option<Vec<f64>> {
    let candidates: Vec<usize> = (0..level.metastable.len()).filter(|&k| level.metastable[k].len() >= 2).collect();
    if candidates.is_empty() {
        return None;
    }
    let k = candidates[rng.random_range(0..candidates.len())];
    let mut omega: Vec<f64> = random_probability(rng, level.metastable.len()).iter().map(|w| 0.5 * w).collect();
    omega[k] += 0.5;
    let mut w = combine(h, &level.metastable.iter().zip(omega).collect::<Vec<_>>());
    let set: Vec<usize> = level.metastable[k].members().iter().map(|m| m.0).collect();
    let parts = &level.merged_from[k];
    // Prefer moving mass between whole parts so the previous level still
    // decomposes.
    let group: Vec<usize> = match prev {
        Some(prev) if parts.len() >= 2 => {
            prev.metastable[parts[rng.random_range(0..parts.len())]].members().iter().map(|m| m.0).collect()
        }
        _ => vec![set[rng.random_range(0..set.len())]],
    };
    shift_toward(&mut w, &set, &group);
    Some(w)
}

fn off_support<R: Rng + ?Sized>(rng: &mut R, h: &Hierarchy, level: &TreeLevel) -> Option<Vec<f64>> {
    if level.absorbed.is_empty() {
        return None;
    }
    let a = &level.absorbed[rng.random_range(0..level.absorbed.len())];
    let base = on_support(rng, h, level);
    let off = pi_measure(&h.graph, a);
    Some(base.iter().zip(off.weights()).map(|(b, o)| 0.7 * b + 0.3 * o).collect())
}

/// Generates `n_random` measures per level and verifies that the order-`p`
/// functional is finite exactly on combinations of the level's `π_M`, that it
/// vanishes exactly when the next order is finite, and that the top order
/// vanishes on a single measure charging only the global minima.
pub fn consistency_check<R: Rng + ?Sized>(
    h: &Hierarchy,
    n_random: usize,
    rng: &mut R,
    match_tol: f64,
) -> Result<ConsistencyReport, GammaError> {
    let q = h.q();
    let g = &h.graph;
    let mut failures = Vec::new();
    let mut measures = 0;
    let top = &h.levels[q - 1];
    let top_zero = stationary(rng, h, top);
    let mut zero_at_top: Vec<Vec<f64>> = Vec::new();

    for (idx, level) in h.levels.iter().enumerate() {
        let p = level.p;
        let prev = idx.checked_sub(1).map(|i| &h.levels[i]);
        for n in 0..n_random {
            let kind = KINDS[n % KINDS.len()];
            let generated = match kind {
                Kind::OnSupport => Some(on_support(rng, h, level)),
                Kind::Stationary => Some(stationary(rng, h, level)),
                Kind::RatioPerturbed => ratio_perturbed(rng, h, level, prev),
                Kind::OffSupport => off_support(rng, h, level),
            };
            let (kind, weights) = match generated {
                Some(w) => (kind, w),
                None => (Kind::OnSupport, on_support(rng, h, level)),
            };
            measures += 1;
            let mu = StateMeasure::normalized(weights)?;
            let values =
                h.levels.iter().map(|l| j_level(h, l.p, &mu, match_tol)).collect::<Result<Vec<GammaValue>, _>>()?;
            let here = values[idx];
            let expected_finite = matches!(kind, Kind::OnSupport | Kind::Stationary);
            if here.is_finite() != expected_finite {
                failures.push(format!("finiteness: level {p}, {kind:?} measure gave {here}"));
            }
            match (kind, here) {
                (Kind::Stationary, v) if !v.is_zero(ZERO_TOL) => {
                    failures.push(format!("zero set: level {p}, stationary combination gave {v}"));
                }
                (Kind::RatioPerturbed, GammaValue::Infinite(r)) if r != InfiniteReason::RatioMismatch => {
                    failures.push(format!("reason: level {p}, ratio perturbation reported {r}"));
                }
                (Kind::OffSupport, GammaValue::Infinite(r)) if r != InfiniteReason::OffSupport => {
                    failures.push(format!("reason: level {p}, absorbed mass reported {r}"));
                }
                _ => {}
            }
            // Atoms on minima: order 0 vanishes, so order 1 must be finite.
            if !values[0].is_finite() {
                failures.push(format!("order one infinite on a measure over minima (level {p}, {kind:?})"));
            }
            for (i, pair) in values.windows(2).enumerate() {
                if pair[0].is_zero(ZERO_TOL) != pair[1].is_finite() {
                    failures.push(format!(
                        "zero/finite link: level {} gave {} but level {} gave {} ({kind:?} at level {p})",
                        i + 1,
                        pair[0],
                        i + 2,
                        pair[1]
                    ));
                }
            }
            if values[q - 1].is_zero(ZERO_TOL) {
                zero_at_top.push(mu.into_weights());
            }
        }
    }

    match j_level(h, q, &StateMeasure::normalized(top_zero.clone())?, match_tol)? {
        v if v.is_zero(ZERO_TOL) => {}
        v => failures.push(format!("top order is {v} on its stationary measure")),
    }
    let globals = g.global_minima();
    let nu_star = g.nu_star();
    for m in g.min_ids() {
        let expected = if globals.contains(&m) { g.minimum(m).nu / nu_star } else { 0.0 };
        if (top_zero[m.0] - expected).abs() > 1e-12 {
            failures.push(format!(
                "top zero charges minimum {} with {} instead of {expected}",
                g.minimum(m).id,
                top_zero[m.0]
            ));
        }
    }
    for w in &zero_at_top {
        let gap = w.iter().zip(&top_zero).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if gap > match_tol {
            failures.push(format!("a second zero of the top order differs by {gap:e}"));
        }
    }
    Ok(ConsistencyReport { measures, top_zero, failures })
}
