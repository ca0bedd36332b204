//! Level-by-level construction of the hierarchy.

use alloc::vec;
use alloc::vec::Vec;

use super::{Hierarchy, MinSet, TreeError, TreeLevel};
use crate::chain::{communicating_classes, trace_process, Ctmc, StateMeasure};
use crate::landscape::LandscapeGraph;
use crate::Height;

/// Depths farther than the height tolerance from the level depth but within
/// this multiple of it are rejected as ambiguous.
pub const DEGENERACY_FACTOR: f64 = 100.0;

fn level_depth(graph: &LandscapeGraph, level: usize, xi: &[Height]) -> Result<f64, TreeError> {
    let d = xi.iter().filter_map(|h| h.finite()).fold(f64::INFINITY, f64::min);
    if !d.is_finite() {
        return Err(TreeError::Disconnected(level));
    }
    let tol = graph.height_tol();
    let band = DEGENERACY_FACTOR * tol;
    for h in xi.iter().filter_map(|h| h.finite()) {
        let gap = (h - d).abs();
        if gap > tol && gap <= band {
            return Err(TreeError::DegenerateLandscape { level, depth: h, level_depth: d, band });
        }
    }
    Ok(d)
}

fn at_level_depth(xi: Height, d: f64, tol: f64) -> bool {
    xi.approx_eq(Height::Finite(d), tol)
}

/// Level one: singletons, depth `min Ξ(m)` and rates through the saddles
/// directly linking a minimum of depth `d` to its neighbours.
pub fn first_layer(graph: &LandscapeGraph) -> Result<TreeLevel, TreeError> {
    let n = graph.min_count();
    if n < 2 {
        return Err(TreeError::TooFewMinima(n));
    }
    let sets: Vec<MinSet> = graph.min_ids().map(MinSet::singleton).collect();
    let xi = sets.iter().map(|s| graph.depth(s.members())).collect::<Result<Vec<_>, _>>()?;
    let d = level_depth(graph, 1, &xi)?;
    let tol = graph.height_tol();
    let mut rates = vec![0.0; n * n];
    for m in graph.min_ids() {
        if !at_level_depth(xi[m.0], d, tol) {
            continue;
        }
        let node = graph.minimum(m);
        let level = node.height + d;
        for other in graph.min_ids().filter(|&o| o != m) {
            let omega = graph.omega_sum(&graph.direct_saddles(m, other, level));
            rates[m.0 * n + other.0] = omega / node.nu;
        }
    }
    let chain = Ctmc::new(n, rates)?;
    let classes = communicating_classes(&chain);
    Ok(TreeLevel {
        p: 1,
        depth: d,
        merged_from: (0..n).map(|i| vec![i]).collect(),
        metastable: sets,
        absorbed: Vec::new(),
        hat_chain: chain.clone(),
        chain,
        classes,
        xi,
    })
}

/// The next level: irreducible classes merge into metastable sets,
/// transient sets are absorbed, and the chain is the trace of the extended
/// chain on the metastable sets.
pub fn next_layer(prev: &TreeLevel, graph: &LandscapeGraph) -> Result<TreeLevel, TreeError> {
    if prev.irreducible_count() <= 1 {
        return Err(TreeError::Complete(prev.p));
    }
    let p = prev.p + 1;
    let mut merged_from = Vec::new();
    let mut metastable = Vec::new();
    for class in prev.classes.recurrent() {
        let members = class.states.iter().flat_map(|&i| prev.metastable[i].members().iter().copied()).collect();
        metastable.push(MinSet::new(members));
        merged_from.push(class.states.clone());
    }
    let mut absorbed: Vec<MinSet> = prev
        .absorbed
        .iter()
        .cloned()
        .chain(prev.classes.transient_states().into_iter().map(|t| prev.metastable[t].clone()))
        .collect();
    absorbed.sort();

    let states: Vec<&MinSet> = metastable.iter().chain(&absorbed).collect();
    let xi = states.iter().map(|s| graph.depth(s.members())).collect::<Result<Vec<_>, _>>()?;
    let d = level_depth(graph, p, &xi[..metastable.len()])?;
    let tol = graph.height_tol();
    let nv = metastable.len();
    let ns = states.len();
    let prev_index: Vec<Option<usize>> = states.iter().map(|s| prev.position(s)).collect();
    let mut rates = vec![0.0; ns * ns];
    for a in 0..ns {
        for b in (0..ns).filter(|&b| b != a) {
            let rate = if a >= nv {
                let from =
                    prev_index[a].ok_or_else(|| TreeError::Other("absorbed set missing from previous level".into()))?;
                if b >= nv {
                    let to = prev_index[b]
                        .ok_or_else(|| TreeError::Other("absorbed set missing from previous level".into()))?;
                    prev.hat_chain.rate(from, to)
                } else {
                    merged_from[b].iter().map(|&i| prev.hat_chain.rate(from, i)).sum()
                }
            } else if at_level_depth(xi[a], d, tol) {
                let gates = graph.gate_saddles(states[a].members(), states[b].members())?;
                graph.omega_sum(&gates) / graph.nu_sum(states[a].members())
            } else {
                0.0
            };
            rates[a * ns + b] = rate;
        }
    }
    let hat_chain = Ctmc::new(ns, rates)?;
    let targets: Vec<usize> = (0..nv).collect();
    let chain = trace_process(&hat_chain, &targets)?;
    let classes = communicating_classes(&chain);
    Ok(TreeLevel { p, depth: d, metastable, absorbed, merged_from, hat_chain, chain, classes, xi })
}

/// Iterates levels until the chain has a single irreducible class.
pub fn build_hierarchy(graph: &LandscapeGraph) -> Result<Hierarchy, TreeError> {
    let mut levels = vec![first_layer(graph)?];
    let cap = graph.min_count() + 1;
    while levels.last().is_some_and(|l| l.irreducible_count() > 1) {
        if levels.len() >= cap {
            return Err(TreeError::NoTermination(levels.len()));
        }
        let next = next_layer(levels.last().expect("nonempty"), graph)?;
        levels.push(next);
    }
    Ok(Hierarchy { graph: graph.clone(), levels })
}

/// `π_M = Σ_{m∈M} ν(m)/ν(M) δ_m`, as a measure over all minima.
pub fn pi_measure(graph: &LandscapeGraph, set: &MinSet) -> StateMeasure {
    let total = graph.nu_sum(set.members());
    let mut w = vec![0.0; graph.min_count()];
    for m in set.members() {
        w[m.0] = graph.minimum(*m).nu / total;
    }
    StateMeasure::new(w).expect("weights are positive")
}

/// `ν(M)/ν(∪ class)` for every irreducible class, indexed like the class
/// states.
pub fn level_stationaries(level: &TreeLevel, graph: &LandscapeGraph) -> Vec<Vec<f64>> {
    level
        .classes
        .recurrent()
        .map(|class| {
            let weights: Vec<f64> = class.states.iter().map(|&i| graph.nu_sum(level.metastable[i].members())).collect();
            let total: f64 = weights.iter().sum();
            weights.into_iter().map(|w| w / total).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{MinId, MinimumNode, SaddleNode, GRAPH_HEIGHT_TOL};
    use alloc::string::ToString;
    use core::f64::consts::{PI, SQRT_2};

    fn ids(indices: &[usize]) -> Vec<MinId> {
        indices.iter().map(|&i| MinId(i)).collect()
    }

    fn graph(minima: &[(&str, f64, f64)], saddles: &[(&str, f64, f64, usize, usize)]) -> LandscapeGraph {
        LandscapeGraph::new(
            minima.iter().map(|&(id, height, nu)| MinimumNode { id: id.to_string(), height, nu }).collect(),
            saddles
                .iter()
                .map(|&(id, height, omega, a, b)| SaddleNode {
                    id: id.to_string(),
                    height,
                    omega,
                    connects: [MinId(a), MinId(b)],
                })
                .collect(),
            GRAPH_HEIGHT_TOL,
        )
        .unwrap()
    }

    #[test]
    fn double_well_single_level() {
        let nu = 1.0 / (2.0 * SQRT_2);
        let g = graph(&[("L", 0.0, nu), ("R", 0.0, nu)], &[("S", 1.0, 1.0 / PI, 0, 1)]);
        let h = build_hierarchy(&g).unwrap();
        assert_eq!(h.q(), 1);
        assert_eq!(h.levels[0].depth, 1.0);
        let expected = 2.0 * SQRT_2 / PI;
        assert!((h.levels[0].chain.rate(0, 1) - expected).abs() < 1e-15);
        assert!((h.levels[0].chain.rate(1, 0) - expected).abs() < 1e-15);
    }

    #[test]
    fn unequal_pair() {
        let g = graph(&[("A", 0.0, 1.0), ("B", 0.2, 2.0)], &[("S", 1.0, 3.0, 0, 1)]);
        let l = first_layer(&g).unwrap();
        assert_eq!(l.xi[0], Height::Infinite);
        assert!((l.xi[1].finite().unwrap() - 0.8).abs() < 1e-15);
        assert!((l.depth - 0.8).abs() < 1e-15);
        assert_eq!(l.chain.rate(1, 0), 1.5);
        assert_eq!(l.chain.rate(0, 1), 0.0);
    }

    #[test]
    fn triple_well_two_levels() {
        let g = graph(
            &[("A", 0.0, 1.0), ("B", 0.0, 1.0), ("C", 0.1, 1.0)],
            &[("S_AB", 0.5, 1.0, 0, 1), ("S_BC", 1.0, 1.0, 1, 2)],
        );
        let h = build_hierarchy(&g).unwrap();
        assert_eq!(h.q(), 2);
        assert_eq!(h.depths(), vec![0.5, 0.9]);
        let l1 = &h.levels[0];
        assert_eq!((l1.chain.rate(0, 1), l1.chain.rate(1, 0)), (1.0, 1.0));
        assert_eq!(l1.chain.out_rate(2), 0.0);
        let l2 = &h.levels[1];
        assert_eq!(l2.metastable, vec![MinSet::new(ids(&[0, 1])), MinSet::new(ids(&[2]))]);
        assert!(l2.absorbed.is_empty());
        assert_eq!(l2.xi[0], Height::Infinite);
        assert_eq!(l2.chain.rate(1, 0), 1.0);
        assert_eq!(l2.chain.rate(0, 1), 0.0);
    }

    #[test]
    fn transient_set_is_absorbed() {
        // D drains into A at level one and is carried as an absorbed set.
        let g = graph(
            &[("A", 0.0, 1.0), ("B", 0.0, 1.0), ("C", 0.05, 1.0), ("D", 0.3, 2.0)],
            &[("S_AB", 0.5, 1.0, 0, 1), ("S_AD", 0.8, 4.0, 0, 3), ("S_BC", 1.0, 1.0, 1, 2)],
        );
        let l1 = first_layer(&g).unwrap();
        assert!((l1.depth - 0.5).abs() < 1e-15);
        // Ξ(D) = 0.5 = d: D jumps to A with rate 4/2.
        assert_eq!(l1.chain.rate(3, 0), 2.0);
        let l2 = next_layer(&l1, &g).unwrap();
        assert_eq!(l2.absorbed, vec![MinSet::singleton(MinId(3))]);
        let d_pos = l2.metastable.len();
        // Case 3: the absorbed set keeps its rate into the merged class {A,B}.
        assert_eq!(l2.hat_chain.rate(d_pos, 0), 2.0);
        assert!(matches!(next_layer(&build_hierarchy(&g).unwrap().levels[1], &g), Err(TreeError::Complete(2))));
    }

    #[test]
    fn pi_and_stationaries() {
        let g = graph(
            &[("A", 0.0, 1.0), ("B", 0.0, 2.0), ("C", 0.1, 1.0)],
            &[("S_AB", 0.5, 1.0, 0, 1), ("S_BC", 1.0, 1.0, 1, 2)],
        );
        let h = build_hierarchy(&g).unwrap();
        let st = level_stationaries(&h.levels[0], &g);
        assert!((st[0][0] - 1.0 / 3.0).abs() < 1e-15 && (st[0][1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(st[1], vec![1.0]);
        let pi = pi_measure(&g, &MinSet::new(ids(&[0, 1])));
        assert!((pi.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pi_measure(&g, &MinSet::singleton(MinId(2))).weights(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn single_class_at_level_one() {
        let g = graph(
            &[("A", 0.0, 1.0), ("B", 0.0, 1.0), ("C", 0.0, 1.0)],
            &[("S1", 1.0, 1.0, 0, 1), ("S2", 1.0, 1.0, 1, 2)],
        );
        assert_eq!(build_hierarchy(&g).unwrap().q(), 1);
    }

    #[test]
    fn too_few_minima() {
        let g = graph(&[("A", 0.0, 1.0)], &[]);
        assert_eq!(first_layer(&g), Err(TreeError::TooFewMinima(1)));
    }
}
