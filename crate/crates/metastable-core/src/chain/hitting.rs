//! Hitting distributions, harmonic extensions and trace chains.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::{communicating_classes, ChainError, Ctmc};
use crate::linalg::solve;

/// `P_x[H_V = H_y]` for every state `x` and every target `y ∈ V`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTable {
    /// The target set, in the caller's order.
    pub targets: Vec<usize>,
    /// `probs[x][j] = P_x[H_V = H_{targets[j]}]`.
    pub probs: Vec<Vec<f64>>,
}

impl HittingTable {
    pub fn prob(&self, from: usize, target_pos: usize) -> f64 {
        self.probs[from][target_pos]
    }
}

fn validate_subset(chain: &Ctmc, set: &[usize]) -> Result<(), ChainError> {
    if let Some(&s) = set.iter().find(|&&s| s >= chain.len()) {
        return Err(ChainError::StateOutOfRange(s));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return Err(ChainError::PreconditionViolated("target set has repeated states".into()));
    }
    if set.is_empty() {
        return Err(ChainError::PreconditionViolated("target set is empty".into()));
    }
    for class in communicating_classes(chain).recurrent() {
        if !class.states.iter().any(|x| set.contains(x)) {
            return Err(ChainError::PreconditionViolated(format!(
                "target set misses the recurrent class {:?}",
                class.states
            )));
        }
    }
    Ok(())
}

/// Solves `(L h)(x) = 0` off `V` with `h = 1{y}` on `V`, for every `y ∈ V`.
pub fn hitting_probabilities(chain: &Ctmc, set: &[usize]) -> Result<HittingTable, ChainError> {
    validate_subset(chain, set)?;
    let n = chain.len();
    let outside: Vec<usize> = (0..n).filter(|x| !set.contains(x)).collect();
    let k = outside.len();
    let mut a = DMatrix::zeros(k, k);
    let mut b = DMatrix::zeros(k, set.len());
    for (i, &x) in outside.iter().enumerate() {
        a[(i, i)] = chain.out_rate(x);
        for (j, &z) in outside.iter().enumerate() {
            if i != j {
                a[(i, j)] -= chain.rate(x, z);
            }
        }
        for (j, &y) in set.iter().enumerate() {
            b[(i, j)] = chain.rate(x, y);
        }
    }
    let h = solve(&a, &b)?;
    let mut probs = vec![vec![0.0; set.len()]; n];
    for (j, &y) in set.iter().enumerate() {
        probs[y][j] = 1.0;
    }
    for (i, &x) in outside.iter().enumerate() {
        for j in 0..set.len() {
            // Adding zero turns a negative zero positive.
            probs[x][j] = h[(i, j)].clamp(0.0, 1.0) + 0.0;
        }
    }
    Ok(HittingTable { targets: set.to_vec(), probs })
}

/// The harmonic function equal to `values` on `set`.
pub fn harmonic_extension(chain: &Ctmc, set: &[usize], values: &[f64]) -> Result<Vec<f64>, ChainError> {
    if values.len() != set.len() {
        return Err(ChainError::Shape { expected: set.len(), got: values.len() });
    }
    let table = hitting_probabilities(chain, set)?;
    Ok(table.probs.iter().map(|row| row.iter().zip(values).map(|(p, f)| p * f).sum()).collect())
}

/// The chain observed only while in `set`; state `j` of the result is `set[j]`.
pub fn trace_process(chain: &Ctmc, set: &[usize]) -> Result<Ctmc, ChainError> {
    let table = hitting_probabilities(chain, set)?;
    let m = set.len();
    let outside: Vec<usize> = (0..chain.len()).filter(|x| !set.contains(x)).collect();
    let mut rates = vec![0.0; m * m];
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            if i == j {
                continue;
            }
            let via: f64 = outside.iter().map(|&z| chain.rate(x, z) * table.probs[z][j]).sum();
            rates[i * m + j] = chain.rate(x, y) + via;
        }
    }
    Ctmc::new(m, rates)
}
