//! Communicating classes and per-class stationary distributions.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{ChainError, Ctmc, StateMeasure};
use crate::linalg::solve;

/// A strongly connected component of the positive-rate digraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommClass {
    /// Member states in increasing order.
    pub states: Vec<usize>,
    /// No positive rate leaves the class.
    pub recurrent: bool,
}

/// Partition of the states into communicating classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecomposition {
    /// Ordered by smallest member state.
    pub classes: Vec<CommClass>,
    /// Index into `classes` for every state.
    pub class_of: Vec<usize>,
}

impl ClassDecomposition {
    /// Assembles a decomposition from `(states, recurrent)` pairs that must
    /// partition `0..n`.
    pub fn from_classes(classes: Vec<(Vec<usize>, bool)>, n: usize) -> Result<Self, ChainError> {
        let mut class_of = vec![usize::MAX; n];
        let mut out = Vec::with_capacity(classes.len());
        for (k, (mut states, recurrent)) in classes.into_iter().enumerate() {
            states.sort_unstable();
            for &s in &states {
                if s >= n || class_of[s] != usize::MAX {
                    return Err(ChainError::InvalidPartition);
                }
                class_of[s] = k;
            }
            out.push(CommClass { states, recurrent });
        }
        if class_of.contains(&usize::MAX) {
            return Err(ChainError::InvalidPartition);
        }
        Ok(Self { classes: out, class_of })
    }

    pub fn recurrent(&self) -> impl Iterator<Item = &CommClass> {
        self.classes.iter().filter(|c| c.recurrent)
    }

    pub fn transient_states(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.classes.iter().filter(|c| !c.recurrent).flat_map(|c| c.states.iter().copied()).collect();
        out.sort_unstable();
        out
    }

    pub fn recurrent_count(&self) -> usize {
        self.recurrent().count()
    }
}

pub fn communicating_classes(chain: &Ctmc) -> ClassDecomposition {
    let n = chain.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for x in 0..n {
        for y in 0..n {
            if chain.rate(x, y) > 0.0 {
                g.add_edge(nodes[x], nodes[y], ());
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut s: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            s.sort_unstable();
            s
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    let mut class_of = vec![0; n];
    for (k, c) in comps.iter().enumerate() {
        for &x in c {
            class_of[x] = k;
        }
    }
    let classes = comps
        .into_iter()
        .enumerate()
        .map(|(k, states)| {
            let recurrent = states.iter().all(|&x| (0..n).all(|y| chain.rate(x, y) == 0.0 || class_of[y] == k));
            CommClass { states, recurrent }
        })
        .collect();
    ClassDecomposition { classes, class_of }
}

/// Unique invariant law of the chain restricted to a closed class, indexed
/// like `states`.
pub(crate) fn class_stationary(chain: &Ctmc, states: &[usize]) -> Result<Vec<f64>, ChainError> {
    let m = states.len();
    if m == 1 {
        return Ok(vec![1.0]);
    }
    // Rows: transposed generator on the class, last row replaced by Σ ω = 1.
    let mut a = DMatrix::zeros(m, m);
    for (i, &x) in states.iter().enumerate() {
        for (j, &y) in states.iter().enumerate() {
            if i != j {
                a[(j, i)] += chain.rate(x, y);
                a[(i, i)] -= chain.rate(x, y);
            }
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DMatrix::zeros(m, 1);
    b[(m - 1, 0)] = 1.0;
    let w = solve(&a, &b)?;
    Ok(w.iter().map(|v| v.max(0.0)).collect())
}

/// One stationary distribution per recurrent class, as measures on all states.
pub fn stationary_distributions(chain: &Ctmc) -> Result<Vec<StateMeasure>, ChainError> {
    let dec = communicating_classes(chain);
    dec.recurrent()
        .map(|c| {
            let local = class_stationary(chain, &c.states)?;
            let mut w = vec![0.0; chain.len()];
            for (&x, v) in c.states.iter().zip(local) {
                w[x] = v;
            }
            StateMeasure::normalized(w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(rows: &[&[f64]]) -> Ctmc {
        Ctmc::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn one_way_pair() {
        let d = communicating_classes(&chain(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(d.classes.len(), 2);
        assert!(!d.classes[0].recurrent);
        assert!(d.classes[1].recurrent);
    }

    #[test]
    fn symmetric_pair_is_one_class() {
        let c = chain(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let d = communicating_classes(&c);
        assert_eq!(d.classes, vec![CommClass { states: vec![0, 1], recurrent: true }]);
        let s = stationary_distributions(&c).unwrap();
        assert_eq!(s[0].weights(), &[0.5, 0.5]);
    }

    #[test]
    fn biased_pair_stationary() {
        let s = stationary_distributions(&chain(&[&[0.0, 2.0], &[1.0, 0.0]])).unwrap();
        assert!((s[0].weights()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s[0].weights()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn absorbing_singleton_is_dirac() {
        let s = stationary_distributions(&chain(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].weights(), &[0.0, 1.0, 0.0]);
    }
}
