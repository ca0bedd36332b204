//! Finite continuous-time Markov chains: classes, stationary measures,
//! hitting distributions, trace and reflected chains, and the
//! Donsker-Varadhan level-two rate.

mod classes;
mod dv;
mod hitting;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::linalg::LinalgError;

pub use classes::{communicating_classes, stationary_distributions, ClassDecomposition, CommClass};
pub use dv::{dv_rate, dv_rate_sup, DvMethod, REVERSIBILITY_TOL};
pub use hitting::{harmonic_extension, hitting_probabilities, trace_process, HittingTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("rate from state {from} to state {to} is invalid: {value}")]
    InvalidRate { from: usize, to: usize, value: f64 },
    #[error("rate table has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("state {0} out of range")]
    StateOutOfRange(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("classes do not partition the states")]
    InvalidPartition,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A continuous-time Markov chain on states `0..n` given by its jump rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Ctmc {
    n: usize,
    /// Row-major `n × n` table; the diagonal is zero.
    rates: Vec<f64>,
}

impl Ctmc {
    /// Validates a row-major rate table: finite, nonnegative, zero diagonal.
    pub fn new(n: usize, rates: Vec<f64>) -> Result<Self, ChainError> {
        if rates.len() != n * n {
            return Err(ChainError::Shape { expected: n * n, got: rates.len() });
        }
        for x in 0..n {
            for y in 0..n {
                let value = rates[x * n + y];
                let bad = !value.is_finite() || value < 0.0 || (x == y && value != 0.0);
                if bad {
                    return Err(ChainError::InvalidRate { from: x, to: y, value });
                }
            }
        }
        Ok(Self { n, rates })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ChainError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(ChainError::Shape { expected: n, got: r.len() });
        }
        Self::new(n, rows.concat())
    }

    /// A chain with no transitions.
    pub fn silent(n: usize) -> Self {
        Self { n, rates: vec![0.0; n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.rates[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rates[x * self.n..(x + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|x| self.row(x).to_vec()).collect()
    }

    /// Total jump rate out of `x`.
    pub fn out_rate(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }

    /// Jump rate from `x` into states outside `set`.
    pub fn out_rate_avoiding(&self, x: usize, set: &[usize]) -> f64 {
        self.row(x).iter().enumerate().filter(|(y, _)| !set.contains(y)).map(|(_, r)| r).sum()
    }

    /// `(Lf)(x) = Σ_y r(x,y)(f(y) − f(x))`.
    pub fn generator_apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n).map(|x| self.row(x).iter().zip(f).map(|(r, fy)| r * (fy - f[x])).sum()).collect()
    }

    /// `−Σ_x ρ(x) g(x) (Lg)(x)`.
    pub fn energy(&self, rho: &[f64], g: &[f64]) -> f64 {
        let lg = self.generator_apply(g);
        -(0..self.n).map(|x| rho[x] * g[x] * lg[x]).sum::<f64>()
    }

    /// The chain restricted to `states` (in that order) with all other jumps
    /// suppressed.
    pub fn reflected(&self, states: &[usize]) -> Result<Ctmc, ChainError> {
        if let Some(&s) = states.iter().find(|&&s| s >= self.n) {
            return Err(ChainError::StateOutOfRange(s));
        }
        let m = states.len();
        let mut rates = vec![0.0; m * m];
        for (i, &x) in states.iter().enumerate() {
            for (j, &y) in states.iter().enumerate() {
                if i != j {
                    rates[i * m + j] = self.rate(x, y);
                }
            }
        }
        Ok(Ctmc { n: m, rates })
    }

    /// Relabels states: state `perm[x]` of the result is state `x` here.
    pub fn permuted(&self, perm: &[usize]) -> Ctmc {
        let mut rates = vec![0.0; self.n * self.n];
        for x in 0..self.n {
            for y in 0..self.n {
                rates[perm[x] * self.n + perm[y]] = self.rate(x, y);
            }
        }
        Ctmc { n: self.n, rates }
    }

    /// Largest absolute difference between two rate tables of equal size.
    pub fn max_rate_difference(&self, other: &Ctmc) -> f64 {
        self.rates
            .iter()
            .zip(&other.rates)
            .map(|(a, b)| (a - b).abs())
            .fold(if self.n == other.n { 0.0 } else { f64::INFINITY }, f64::max)
    }
}

/// `max |ρ(x)r(x,y) − ρ(y)r(y,x)|` over ordered pairs.
pub fn detailed_balance_residual(chain: &Ctmc, rho: &[f64]) -> f64 {
    let n = chain.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in (x + 1)..n {
            worst = worst.max((rho[x] * chain.rate(x, y) - rho[y] * chain.rate(y, x)).abs());
        }
    }
    worst
}

/// Nonnegative weights on the states of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMeasure(Vec<f64>);

impl StateMeasure {
    /// Tolerance on the total mass of a probability measure.
    pub const MASS_TOL: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self, ChainError> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(ChainError::InvalidMeasure(alloc::format!("weight {w} is not a nonnegative number")));
        }
        Ok(Self(weights))
    }

    /// Validates that the weights sum to one.
    pub fn probability(weights: Vec<f64>) -> Result<Self, ChainError> {
        let m = Self::new(weights)?;
        if (m.total() - 1.0).abs() > Self::MASS_TOL {
            return Err(ChainError::InvalidMeasure(alloc::format!("total mass {} is not 1", m.total())));
        }
        Ok(m)
    }

    /// Rescales nonzero weights to total mass one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self, ChainError> {
        let m = Self::new(weights)?;
        let total = m.total();
        if total <= 0.0 {
            return Err(ChainError::InvalidMeasure("zero total mass".into()));
        }
        Ok(Self(m.0.into_iter().map(|w| w / total).collect()))
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        Self(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total() - 1.0).abs() <= Self::MASS_TOL
    }

    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, _)| i).collect()
    }

    /// Total-variation distance to a measure on the same states.
    pub fn total_variation(&self, other: &StateMeasure) -> f64 {
        0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        assert!(Ctmc::new(2, vec![0.0, -1.0, 1.0, 0.0]).is_err());
        assert!(Ctmc::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(Ctmc::new(2, vec![0.0, f64::NAN, 1.0, 0.0]).is_err());
        assert!(Ctmc::new(2, vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn detailed_balance_examples() {
        let c = Ctmc::from_rows(&[vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        assert!(detailed_balance_residual(&c, &[1.0 / 3.0, 2.0 / 3.0]) < 1e-15);
        assert!((detailed_balance_residual(&c, &[2.0 / 3.0, 1.0 / 3.0]) - 1.0).abs() < 1e-15);
        let sym = Ctmc::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(detailed_balance_residual(&sym, &[0.5, 0.5]), 0.0);
    }

    #[test]
    fn reflected_keeps_internal_rates() {
        let c = Ctmc::from_rows(&[vec![0.0, 1.0, 2.0], vec![3.0, 0.0, 4.0], vec![5.0, 6.0, 0.0]]).unwrap();
        let r = c.reflected(&[0, 1]).unwrap();
        assert_eq!(r.rows(), vec![vec![0.0, 1.0], vec![3.0, 0.0]]);
        assert_eq!(c.reflected(&[2]).unwrap().rows(), vec![vec![0.0]]);
    }

    #[test]
    fn generator_annihilates_constants() {
        let c = Ctmc::from_rows(&[vec![0.0, 1.0, 2.0], vec![3.0, 0.0, 4.0], vec![5.0, 6.0, 0.0]]).unwrap();
        assert!(c.generator_apply(&[7.0; 3]).iter().all(|v| *v == 0.0));
    }
}
