//! Gibbs quadrature and the explicit test densities whose Dirichlet forms
//! approach each order of the expansion.
//!
//! Densities are stored through the log of `ψ = √(dμ/dx)`, so the Dirichlet
//! form `ε∫|∇f|²dπ_ε` with `f² = dμ/dπ_ε` is assembled from nodal
//! differences of `f·√π_ε` without forming `e^{±U/ε}`.

mod critical;
mod metastable;
mod oracle;
mod premeta;
mod quadrature;
mod saddle;

use alloc::string::String;
use thiserror::Error;

use crate::chain::ChainError;
use crate::grid::GridError;
use crate::landscape::LandscapeError;

pub use critical::{bump, bump_derivative, critical_density, critical_split, CriticalSplit, BUMP_PLATEAU};
pub use metastable::{
    limsup_algebra, metastable_measure, metastable_test_functions, test_function_tail, valley_mask, LimsupAlgebra,
    MetastableMeasure, TestFunctions, WellMass,
};
pub use oracle::{gaussian_limits, truncated_gaussian_moments, validate_gaussian_quadrature, GaussianCheck};
pub use premeta::{premetastable_density, Premetastable};
pub use quadrature::{partition_function, DensityKind, GibbsQuadrature, TestDensity, BOUNDARY_MASS_LIMIT};
pub use saddle::{capacity_integral, saddle_profile, SaddleGeometry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirichletError {
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("quadrature supports dimensions 1 and 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("Gibbs mass {boundary_mass:e} on the box boundary exceeds the cutoff bound")]
    CutoffViolated { boundary_mass: f64 },
    #[error("scale δ = {delta} must lie strictly between {lower} and {upper}")]
    ScaleViolation { delta: f64, lower: f64, upper: f64 },
    #[error("test density vanishes on every node")]
    EmptyDensity,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("landscape: {0}")]
    Landscape(#[from] LandscapeError),
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
}

/// Whether a sequence of relative errors decreases along a schedule of
/// shrinking `ε`, tolerating one increase smaller than a fifth of the
/// previous error.
pub fn error_trend_ok(errors: &[f64]) -> bool {
    let mut inversions = 0;
    for w in errors.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if inversions > 1 || w[1] - w[0] >= 0.2 * w[0] {
                return false;
            }
        }
    }
    errors.iter().all(|e| e.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_allows_one_small_inversion() {
        assert!(error_trend_ok(&[0.3, 0.2, 0.1]));
        assert!(error_trend_ok(&[0.3, 0.2, 0.21, 0.1]));
        assert!(!error_trend_ok(&[0.3, 0.2, 0.3]));
        assert!(!error_trend_ok(&[0.3, 0.2, 0.21, 0.22]));
        assert!(!error_trend_ok(&[0.3, f64::NAN]));
    }
}
