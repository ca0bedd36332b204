//! The recursive tree of metastable time scales built from a landscape graph.

mod build;
mod checks;

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

use crate::chain::{ChainError, ClassDecomposition, Ctmc};
use crate::landscape::{LandscapeError, LandscapeGraph, MinId};
use crate::Height;

pub use build::{build_hierarchy, first_layer, level_stationaries, next_layer, pi_measure, DEGENERACY_FACTOR};
pub use checks::{check_hierarchy, check_local_reversibility, InvariantFailure, REVERSIBILITY_RESIDUAL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("the landscape needs at least two minima, found {0}")]
    TooFewMinima(usize),
    #[error("no finite barrier separates the metastable sets at level {0}")]
    Disconnected(usize),
    #[error("degenerate landscape at level {level}: depth {depth} is within {band} of the level depth {level_depth}")]
    DegenerateLandscape { level: usize, depth: f64, level_depth: f64, band: f64 },
    #[error("level {0} already has a single irreducible class")]
    Complete(usize),
    #[error("construction did not terminate after {0} levels")]
    NoTermination(usize),
    #[error("landscape: {0}")]
    Landscape(#[from] LandscapeError),
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
    #[error("{0}")]
    Other(String),
}

/// A set of minima stored canonically in increasing index order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MinSet(Vec<MinId>);

impl MinSet {
    pub fn new(mut members: Vec<MinId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn singleton(m: MinId) -> Self {
        Self(alloc::vec![m])
    }

    pub fn members(&self) -> &[MinId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, m: MinId) -> bool {
        self.0.binary_search(&m).is_ok()
    }

    /// Member ids as declared in `graph`, in canonical order.
    pub fn labels(&self, graph: &LandscapeGraph) -> Vec<String> {
        self.0.iter().map(|m| graph.minimum(*m).id.clone()).collect()
    }
}

/// One level of the hierarchy.
///
/// States of `hat_chain` are `metastable` followed by `absorbed`; states of
/// `chain` are `metastable`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeLevel {
    /// Level index, starting at 1.
    pub p: usize,
    /// Barrier depth setting the level's time scale `e^{depth/ε}`.
    pub depth: f64,
    pub metastable: Vec<MinSet>,
    pub absorbed: Vec<MinSet>,
    /// For every metastable set, the indices of the previous level's
    /// metastable sets whose union it is (itself at level 1).
    pub merged_from: Vec<Vec<usize>>,
    pub hat_chain: Ctmc,
    pub chain: Ctmc,
    pub classes: ClassDecomposition,
    /// Depth of every state of `hat_chain`.
    pub xi: Vec<Height>,
}

impl TreeLevel {
    /// All sets, metastable first.
    pub fn states(&self) -> impl Iterator<Item = &MinSet> {
        self.metastable.iter().chain(&self.absorbed)
    }

    pub fn state_count(&self) -> usize {
        self.metastable.len() + self.absorbed.len()
    }

    /// Number of irreducible (recurrent) classes of `chain`.
    pub fn irreducible_count(&self) -> usize {
        self.classes.recurrent_count()
    }

    pub fn position(&self, set: &MinSet) -> Option<usize> {
        self.states().position(|s| s == set)
    }
}

/// The full tree of levels `1..=q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub graph: LandscapeGraph,
    pub levels: Vec<TreeLevel>,
}

impl Hierarchy {
    pub fn q(&self) -> usize {
        self.levels.len()
    }

    /// Level `p` (1-based).
    pub fn level(&self, p: usize) -> Option<&TreeLevel> {
        p.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn depths(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.depth).collect()
    }
}
