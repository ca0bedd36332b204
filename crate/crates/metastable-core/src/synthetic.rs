//! Random landscape graphs and Markov chains for property checks and demos.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::chain::Ctmc;
use crate::landscape::{LandscapeGraph, MinId, MinimumNode, SaddleNode, GRAPH_HEIGHT_TOL};

/// How heights of a random landscape graph are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeightMode {
    /// Continuous heights; ties occur with probability zero.
    Generic,
    /// Heights on a grid of quarter units, so that exact ties are frequent.
    Quantized,
}

/// A connected landscape graph with `minima` minima, a random spanning tree of
/// saddles and `extra_saddles` further saddles between random pairs.
pub fn random_graph<R: Rng + ?Sized>(
    rng: &mut R,
    minima: usize,
    extra_saddles: usize,
    mode: HeightMode,
) -> LandscapeGraph {
    let height = |rng: &mut R| match mode {
        HeightMode::Generic => rng.random_range(0.0..1.0),
        HeightMode::Quantized => f64::from(rng.random_range(0u32..4)) * 0.25,
    };
    let lift = |rng: &mut R| match mode {
        HeightMode::Generic => rng.random_range(0.1..2.0),
        HeightMode::Quantized => f64::from(rng.random_range(1u32..8)) * 0.25,
    };
    let nodes: Vec<MinimumNode> = (0..minima)
        .map(|k| MinimumNode { id: format!("m{k}"), height: height(rng), nu: rng.random_range(0.5..2.0) })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (1..minima).map(|i| (rng.random_range(0..i), i)).collect();
    if minima >= 2 {
        for _ in 0..extra_saddles {
            let a = rng.random_range(0..minima);
            let mut b = rng.random_range(0..minima - 1);
            if b >= a {
                b += 1;
            }
            pairs.push((a, b));
        }
    }
    let saddles = pairs
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| SaddleNode {
            id: format!("s{k}"),
            height: nodes[a].height.max(nodes[b].height) + lift(rng),
            omega: rng.random_range(0.5..2.0),
            connects: [MinId(a), MinId(b)],
        })
        .collect();
    LandscapeGraph::new(nodes, saddles, GRAPH_HEIGHT_TOL).expect("generated graph is valid")
}

/// A chain on `n` states where each off-diagonal rate is positive with
/// probability `density`.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Ctmc {
    let mut rates = vec![0.0; n * n];
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            if rng.random_bool(density) {
                rates[x * n + y] = rng.random_range(0.1..2.0);
            }
        }
    }
    Ctmc::new(n, rates).expect("generated rates are valid")
}

/// A chain reversible with respect to a random positive measure, returned
/// with that measure. Conductances are positive with probability `density`.
pub fn random_reversible_chain<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> (Ctmc, Vec<f64>) {
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    let mut rates = vec![0.0; n * n];
    for x in 0..n {
        for y in (x + 1)..n {
            if rng.random_bool(density) {
                let c = rng.random_range(0.1..2.0);
                rates[x * n + y] = c / weights[x];
                rates[y * n + x] = c / weights[y];
            }
        }
    }
    let total: f64 = weights.iter().sum();
    (Ctmc::new(n, rates).expect("generated rates are valid"), weights.into_iter().map(|w| w / total).collect())
}

/// A probability vector of length `n`, uniform on the simplex.
pub fn random_probability<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -libm::log(1.0 - rng.random::<f64>())).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
