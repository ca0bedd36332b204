//! Executable structural checks on a built hierarchy.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::build::{build_hierarchy, level_stationaries, pi_measure};
use super::{Hierarchy, TreeLevel};
use crate::chain::{communicating_classes, detailed_balance_residual, stationary_distributions, trace_process};
use crate::landscape::LandscapeGraph;
use crate::Height;

/// Bound on the detailed-balance residual of every class.
pub const REVERSIBILITY_RESIDUAL: f64 = 1e-12;

const RATE_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// A failed structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantFailure {
    pub invariant: &'static str,
    /// Level index, or 0 for whole-hierarchy checks.
    pub level: usize,
    pub detail: String,
}

struct Report(Vec<InvariantFailure>);

impl Report {
    fn fail(&mut self, invariant: &'static str, level: usize, detail: String) {
        self.0.push(InvariantFailure { invariant, level, detail });
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Largest detailed-balance residual of the chain reflected on any class of
/// two or more states, against the conditioned `ν`.
pub fn check_local_reversibility(level: &TreeLevel, graph: &LandscapeGraph) -> f64 {
    level
        .classes
        .classes
        .iter()
        .filter(|c| c.states.len() >= 2)
        .map(|c| {
            let reflected = level.chain.reflected(&c.states).expect("class states are in range");
            let weights: Vec<f64> = c.states.iter().map(|&i| graph.nu_sum(level.metastable[i].members())).collect();
            let total: f64 = weights.iter().sum();
            let nu: Vec<f64> = weights.iter().map(|w| w / total).collect();
            detailed_balance_residual(&reflected, &nu)
        })
        .fold(0.0, f64::max)
}

/// Runs every structural check; an empty result means all passed.
pub fn check_hierarchy(h: &Hierarchy) -> Vec<InvariantFailure> {
    let g = &h.graph;
    let tol = g.height_tol();
    let mut r = Report(Vec::new());

    // Number of irreducible classes strictly decreases to one.
    let counts: Vec<usize> = h.levels.iter().map(|l| l.irreducible_count()).collect();
    if counts.last() != Some(&1) || counts.windows(2).any(|w| w[1] >= w[0]) {
        r.fail("tree_class_counts", 0, format!("irreducible class counts {counts:?}"));
    }
    // Depths strictly increase and are positive and finite.
    let depths = h.depths();
    let increasing = depths.windows(2).all(|w| w[1] > w[0] + tol);
    if depths.first().is_none_or(|d| *d <= 0.0) || !increasing || depths.iter().any(|d| !d.is_finite()) {
        r.fail("tree_depths", 0, format!("depths {depths:?}"));
    }
    match build_hierarchy(g) {
        Ok(fresh) if fresh.levels.len() == h.levels.len() => {
            for (a, b) in h.levels.iter().zip(&fresh.levels) {
                let same_sets = a.metastable == b.metastable && a.absorbed == b.absorbed;
                let same_rates = same_sets && a.hat_chain.max_rate_difference(&b.hat_chain) <= RATE_TOL;
                if !same_rates || !rel_close(a.depth, b.depth, RATE_TOL) {
                    r.fail("rebuild_agreement", a.p, "level differs from a fresh construction".into());
                }
            }
        }
        Ok(_) => r.fail("rebuild_agreement", 0, "level count differs from a fresh construction".into()),
        Err(e) => r.fail("rebuild_agreement", 0, format!("fresh construction failed: {e}")),
    }

    for level in &h.levels {
        check_level(level, g, &mut r);
    }
    for pair in h.levels.windows(2) {
        check_nesting(&pair[0], &pair[1], g, &mut r);
    }
    r.0
}

fn check_level(level: &TreeLevel, g: &LandscapeGraph, r: &mut Report) {
    let p = level.p;
    let tol = g.height_tol();
    let d = Height::Finite(level.depth);
    let states: Vec<_> = level.states().collect();
    let nv = level.metastable.len();

    // Sets partition the minima and are simple.
    let mut seen = vec![0usize; g.min_count()];
    for s in &states {
        for m in s.members() {
            seen[m.0] += 1;
        }
        if g.simple_height(s.members()).is_none() {
            r.fail("tree_simple_sets", p, format!("set {:?} is not simple", s.labels(g)));
        }
    }
    if seen.iter().any(|&c| c != 1) {
        r.fail("tree_partition", p, "sets do not partition the minima".into());
    }

    // Stored depths, classes and trace agree with recomputation.
    for (i, s) in states.iter().enumerate() {
        match g.depth(s.members()) {
            Ok(x) if x.approx_eq(level.xi[i], tol) => {}
            _ => r.fail("depth_values", p, format!("stored depth of {:?} is stale", s.labels(g))),
        }
    }
    if communicating_classes(&level.chain) != level.classes {
        r.fail("class_structure", p, "stored classes differ from the chain's".into());
    }
    let targets: Vec<usize> = (0..nv).collect();
    match trace_process(&level.hat_chain, &targets) {
        Ok(t) if t.max_rate_difference(&level.chain) <= RATE_TOL => {}
        _ => r.fail("trace_consistency", p, "chain is not the trace of the extended chain".into()),
    }

    // Positive rate iff depth at most the level depth and a gate exists.
    for (a, sa) in states.iter().enumerate() {
        for (b, sb) in states.iter().enumerate() {
            if a == b {
                continue;
            }
            let positive = level.hat_chain.rate(a, b) > 0.0;
            let shallow = level.xi[a].total_cmp(&d).is_le() || level.xi[a].approx_eq(d, tol);
            let gated = g.gate_saddles(sa.members(), sb.members()).map(|v| !v.is_empty()).unwrap_or(false);
            if positive != (shallow && gated) {
                r.fail(
                    "tree_positive_rates",
                    p,
                    format!(
                        "rate {:?} -> {:?} is {} but depth/gate condition is {}",
                        sa.labels(g),
                        sb.labels(g),
                        level.hat_chain.rate(a, b),
                        shallow && gated
                    ),
                );
            }
        }
    }

    // Depth trichotomy.
    for (i, s) in states.iter().enumerate() {
        let xi = level.xi[i];
        let equal = xi.approx_eq(d, tol);
        let below = !equal && xi.total_cmp(&d).is_lt();
        let absorbed = i >= nv;
        let absorbing = !absorbed && level.chain.out_rate(i) == 0.0;
        let ok = if absorbed {
            below
        } else if absorbing {
            !equal && !below
        } else {
            equal
        };
        if !ok {
            r.fail("depth_trichotomy", p, format!("set {:?} has depth {xi} at level depth {d}", s.labels(g)));
        }
    }

    let residual = check_local_reversibility(level, g);
    if residual > REVERSIBILITY_RESIDUAL {
        r.fail("local_reversibility", p, format!("detailed-balance residual {residual:e}"));
    }

    match stationary_distributions(&level.chain) {
        Ok(stat) => {
            let expected = level_stationaries(level, g);
            for (class, (mu, nu)) in level.classes.recurrent().zip(stat.iter().zip(&expected)) {
                for (&x, want) in class.states.iter().zip(nu) {
                    if (mu.weights()[x] - want).abs() > STATIONARY_TOL {
                        r.fail("level_stationary", p, format!("class {:?} stationary mismatch", class.states));
                    }
                }
            }
        }
        Err(e) => r.fail("level_stationary", p, format!("{e}")),
    }
}

fn check_nesting(prev: &TreeLevel, level: &TreeLevel, g: &LandscapeGraph, r: &mut Report) {
    for (set, parts) in level.metastable.iter().zip(&level.merged_from) {
        let whole = pi_measure(g, set);
        let total = g.nu_sum(set.members());
        let mut combined = vec![0.0; g.min_count()];
        for &i in parts {
            let part = &prev.metastable[i];
            let scale = g.nu_sum(part.members()) / total;
            for (c, w) in combined.iter_mut().zip(pi_measure(g, part).weights()) {
                *c += scale * w;
            }
        }
        let err = whole.weights().iter().zip(&combined).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-12 {
            r.fail("pi_nesting", level.p, format!("set {:?} error {err:e}", set.labels(g)));
        }
    }
}
