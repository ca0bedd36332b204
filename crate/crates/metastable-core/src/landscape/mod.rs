//! Potentials, critical points and the minima/saddle landscape graph.

mod analytic;
mod critical;
mod descent;
mod graph;
mod grid_theta;
mod potential;

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

pub use analytic::{graph_from_potential, AnalysisParams, AnalyticLandscape, ANALYTIC_HEIGHT_REL_TOL};
pub(crate) use critical::distance;
pub use critical::{
    classify, ek_from_eigenvalues, ek_weight, find_critical_points, nu_from_eigenvalues, nu_weight, zeta,
    zeta_from_eigenvalues, CriticalCatalog, CriticalKind, CriticalPoint, CriticalSearch,
};
pub use descent::{descend, heteroclinic_targets, DescentParams};
pub use graph::{LandscapeGraph, MinId, MinimumNode, SaddleId, SaddleNode, GRAPH_HEIGHT_TOL};
pub use grid_theta::{grid_communication_height, GridHeight};
pub use potential::{Bounds, Monomial, Polynomial, Potential};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandscapeError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid landscape graph: {0}")]
    InvalidGraph(String),
    #[error("non-Morse critical point at {location:?} with Hessian eigenvalues {eigenvalues:?}")]
    NonMorse { location: Vec<f64>, eigenvalues: Vec<f64> },
    #[error("wrong critical point kind: {0}")]
    WrongKind(&'static str),
    #[error("steepest descent stalled at {location:?}")]
    DescentStalled { location: Vec<f64> },
    #[error("steepest descent left the box at {location:?}")]
    Diverged { location: Vec<f64> },
    #[error("descent from saddle {saddle:?} ended at non-minimum {reached:?}")]
    AssumptionViolated { saddle: Vec<f64>, reached: Vec<f64> },
    #[error("set of minima is not at a single height")]
    NotSimple,
    #[error("sets of minima are not disjoint")]
    NotDisjoint,
}
