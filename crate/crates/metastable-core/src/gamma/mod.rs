//! Rate functionals of every order on atomic measures.
//!
//! Order −1 and 0 act on measures over points of the state space; orders
//! `p ≥ 1` act on measures over the minima through the level-`p` chain.

mod consistency;
mod report;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::chain::{dv_rate, ChainError, DvMethod, StateMeasure};
use crate::landscape::{zeta, AnalyticLandscape, CriticalCatalog, CriticalKind, Potential};
use crate::tree::{pi_measure, Hierarchy, TreeLevel};

pub use consistency::{consistency_check, ConsistencyReport, ZERO_TOL};
pub use report::{expansion_report, GammaMeasure, GammaReport, LevelValue, TimeScale};

/// Default snap radius for matching atoms to critical points and weights to
/// stationary ratios.
pub const MATCH_TOL: f64 = 1e-6;

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("level {p} is outside 1..={q}")]
    LevelOutOfRange { p: usize, q: usize },
    #[error("atoms have dimension {got} but the potential has dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("measure has {got} weights but the landscape has {expected} minima")]
    MinimaCount { expected: usize, got: usize },
    #[error("point measures need an analytic landscape")]
    NeedsLandscape,
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
}

/// Why a functional is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfiniteReason {
    /// An atom is not at a critical point.
    OffCritical,
    /// Mass sits outside the metastable sets of the level.
    OffSupport,
    /// Weights inside a metastable set are not proportional to its `π`.
    RatioMismatch,
}

impl fmt::Display for InfiniteReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfiniteReason::OffCritical => "off-critical",
            InfiniteReason::OffSupport => "off-support",
            InfiniteReason::RatioMismatch => "ratio-mismatch",
        })
    }
}

/// A value in `[0, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaValue {
    Finite(f64),
    Infinite(InfiniteReason),
}

impl GammaValue {
    pub fn is_finite(self) -> bool {
        matches!(self, GammaValue::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            GammaValue::Finite(v) => Some(v),
            GammaValue::Infinite(_) => None,
        }
    }

    /// Finite and at most `tol`.
    pub fn is_zero(self, tol: f64) -> bool {
        self.finite().is_some_and(|v| v <= tol)
    }

    /// The value as an extended float.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for GammaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaValue::Finite(v) => write!(f, "{v}"),
            GammaValue::Infinite(r) => write!(f, "+inf ({r})"),
        }
    }
}

/// A normalized finite combination of Dirac masses in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMeasure {
    atoms: Vec<(Vec<f64>, f64)>,
}

impl PointMeasure {
    /// Normalizes the weights; they must be finite, nonnegative and not all zero.
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self, GammaError> {
        let dim = atoms.first().map(|(x, _)| x.len()).ok_or_else(|| GammaError::InvalidMeasure("no atoms".into()))?;
        if dim == 0 || atoms.iter().any(|(x, _)| x.len() != dim || x.iter().any(|v| !v.is_finite())) {
            return Err(GammaError::InvalidMeasure("atoms must share a positive dimension and be finite".into()));
        }
        if atoms.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(GammaError::InvalidMeasure("weights must be finite and nonnegative".into()));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(GammaError::InvalidMeasure("total weight is zero".into()));
        }
        Ok(Self { atoms: atoms.into_iter().map(|(x, w)| (x, w / total)).collect() })
    }

    pub fn dirac(x: Vec<f64>) -> Result<Self, GammaError> {
        Self::new(vec![(x, 1.0)])
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.len()
    }

    fn check_dim(&self, potential: &Potential) -> Result<(), GammaError> {
        if self.dim() != potential.dim() {
            return Err(GammaError::Dimension { expected: potential.dim(), got: self.dim() });
        }
        Ok(())
    }
}

/// `¼ Σ w |∇U(x)|²`.
pub fn j_minus1(potential: &Potential, mu: &PointMeasure) -> Result<f64, GammaError> {
    mu.check_dim(potential)?;
    Ok(mu.atoms.iter().map(|(x, w)| 0.25 * w * potential.gradient(x).iter().map(|g| g * g).sum::<f64>()).sum())
}

/// `Σ w ζ(x)` when every charged atom is within `match_tol` of a critical
/// point, `+∞` otherwise.
pub fn j_zero(catalog: &CriticalCatalog, mu: &PointMeasure, match_tol: f64) -> GammaValue {
    let mut total = 0.0;
    for (x, w) in mu.atoms.iter().filter(|(_, w)| *w > 0.0) {
        match catalog.nearest_within(x, match_tol) {
            Some(i) => total += w * zeta(&catalog.points[i]),
            None => return GammaValue::Infinite(InfiniteReason::OffCritical),
        }
    }
    GammaValue::Finite(total)
}

/// Weights over the graph minima of an atomic measure whose atoms all sit on
/// minima.
pub fn snap_to_minima(
    landscape: &AnalyticLandscape,
    mu: &PointMeasure,
    match_tol: f64,
) -> Result<Result<StateMeasure, InfiniteReason>, GammaError> {
    mu.check_dim(&landscape.potential)?;
    let mut weights = vec![0.0; landscape.graph.min_count()];
    for (x, w) in mu.atoms.iter().filter(|(_, w)| *w > 0.0) {
        let Some(i) = landscape.catalog.nearest_within(x, match_tol) else {
            return Ok(Err(InfiniteReason::OffCritical));
        };
        if landscape.catalog.points[i].kind != CriticalKind::Minimum {
            return Ok(Err(InfiniteReason::OffSupport));
        }
        match landscape.minimum_points.iter().position(|&k| k == i) {
            Some(m) => weights[m] += w,
            None => return Ok(Err(InfiniteReason::OffSupport)),
        }
    }
    Ok(Ok(StateMeasure::normalized(weights)?))
}

/// The coefficients `ω(M)` of `μ = Σ_M ω(M) π_M` over the metastable sets of
/// `level`, if such a decomposition exists up to `match_tol`.
pub fn decompose(
    h: &Hierarchy,
    level: &TreeLevel,
    weights: &StateMeasure,
    match_tol: f64,
) -> Result<Vec<f64>, InfiniteReason> {
    let g = &h.graph;
    let mut omega = vec![0.0; level.metastable.len()];
    let mut covered = vec![false; g.min_count()];
    for (k, set) in level.metastable.iter().enumerate() {
        omega[k] = set.members().iter().map(|m| weights.weights()[m.0]).sum();
        for m in set.members() {
            covered[m.0] = true;
        }
    }
    if weights.weights().iter().zip(&covered).any(|(w, c)| !c && *w > match_tol) {
        return Err(InfiniteReason::OffSupport);
    }
    for (k, set) in level.metastable.iter().enumerate() {
        let pi = pi_measure(g, set);
        for m in set.members() {
            if (weights.weights()[m.0] - omega[k] * pi.weights()[m.0]).abs() > match_tol {
                return Err(InfiniteReason::RatioMismatch);
            }
        }
    }
    let total: f64 = omega.iter().sum();
    Ok(omega.into_iter().map(|w| w / total).collect())
}

fn level_of(h: &Hierarchy, p: usize) -> Result<&TreeLevel, GammaError> {
    h.level(p).ok_or(GammaError::LevelOutOfRange { p, q: h.q() })
}

/// The order-`p` functional (`1 ≤ p ≤ q`) of a measure over the minima.
pub fn j_level(h: &Hierarchy, p: usize, weights: &StateMeasure, match_tol: f64) -> Result<GammaValue, GammaError> {
    let level = level_of(h, p)?;
    if weights.len() != h.graph.min_count() {
        return Err(GammaError::MinimaCount { expected: h.graph.min_count(), got: weights.len() });
    }
    if (weights.total() - 1.0).abs() > MASS_TOL {
        return Err(GammaError::InvalidMeasure("weights over minima must sum to one".into()));
    }
    Ok(match decompose(h, level, weights, match_tol) {
        Ok(omega) => {
            let omega = StateMeasure::normalized(omega)?;
            GammaValue::Finite(dv_rate(&level.chain, &omega, DvMethod::Decomposed)?)
        }
        Err(reason) => GammaValue::Infinite(reason),
    })
}

/// The order-`p` functional of an atomic measure in the state space.
pub fn j_level_points(
    h: &Hierarchy,
    landscape: &AnalyticLandscape,
    p: usize,
    mu: &PointMeasure,
    match_tol: f64,
) -> Result<GammaValue, GammaError> {
    level_of(h, p)?;
    match snap_to_minima(landscape, mu, match_tol)? {
        Ok(weights) => j_level(h, p, &weights, match_tol),
        Err(reason) => Ok(GammaValue::Infinite(reason)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{graph_from_potential, AnalysisParams, LandscapeGraph, MinimumNode, SaddleNode};
    use crate::tree::build_hierarchy;
    use alloc::string::ToString;
    use core::f64::consts::{PI, SQRT_2};

    fn double_well() -> (AnalyticLandscape, Hierarchy) {
        let a = graph_from_potential(&Potential::double_well(), &AnalysisParams::default()).unwrap();
        let h = build_hierarchy(&a.graph).unwrap();
        (a, h)
    }

    fn dirac(x: f64) -> PointMeasure {
        PointMeasure::dirac(vec![x]).unwrap()
    }

    #[test]
    fn order_minus_one() {
        let u = Potential::double_well();
        assert_eq!(j_minus1(&u, &dirac(1.0)).unwrap(), 0.0);
        assert!((j_minus1(&u, &dirac(0.5)).unwrap() - 0.5625).abs() < 1e-15);
        let mix = PointMeasure::new(vec![(vec![0.5], 0.5), (vec![-1.0], 0.5)]).unwrap();
        assert!((j_minus1(&u, &mix).unwrap() - 0.28125).abs() < 1e-15);
    }

    #[test]
    fn order_zero() {
        let (a, _) = double_well();
        let z = j_zero(&a.catalog, &dirac(0.0), MATCH_TOL).finite().unwrap();
        assert!((z - 4.0).abs() < 1e-9);
        assert_eq!(j_zero(&a.catalog, &dirac(-1.0), MATCH_TOL), GammaValue::Finite(0.0));
        assert_eq!(j_zero(&a.catalog, &dirac(0.5), MATCH_TOL), GammaValue::Infinite(InfiniteReason::OffCritical));
    }

    #[test]
    fn order_one_on_double_well() {
        let (a, h) = double_well();
        let even = PointMeasure::new(vec![(vec![-1.0], 0.5), (vec![1.0], 0.5)]).unwrap();
        assert!(j_level_points(&h, &a, 1, &even, MATCH_TOL).unwrap().is_zero(1e-12));
        let left = j_level_points(&h, &a, 1, &dirac(-1.0), MATCH_TOL).unwrap().finite().unwrap();
        assert!((left - 2.0 * SQRT_2 / PI).abs() < 1e-9);
        assert_eq!(
            j_level_points(&h, &a, 1, &dirac(0.0), MATCH_TOL).unwrap(),
            GammaValue::Infinite(InfiniteReason::OffSupport)
        );
        assert!(matches!(j_level_points(&h, &a, 2, &even, MATCH_TOL), Err(GammaError::LevelOutOfRange { .. })));
    }

    fn triple_well() -> Hierarchy {
        let minima = [("A", 0.0, 1.0), ("B", 0.0, 1.0), ("C", 0.1, 1.0)];
        let saddles = [("S_AB", 0.5, 1.0, 0, 1), ("S_BC", 1.0, 1.0, 1, 2)];
        let g = LandscapeGraph::new(
            minima.iter().map(|(id, h, nu)| MinimumNode { id: id.to_string(), height: *h, nu: *nu }).collect(),
            saddles
                .iter()
                .map(|(id, h, w, a, b)| SaddleNode {
                    id: id.to_string(),
                    height: *h,
                    omega: *w,
                    connects: [crate::landscape::MinId(*a), crate::landscape::MinId(*b)],
                })
                .collect(),
            crate::landscape::GRAPH_HEIGHT_TOL,
        )
        .unwrap();
        build_hierarchy(&g).unwrap()
    }

    #[test]
    fn ratio_mismatch_is_infinite() {
        let h = triple_well();
        assert_eq!(h.q(), 2);
        let skewed = StateMeasure::normalized(vec![0.3, 0.5, 0.2]).unwrap();
        assert_eq!(j_level(&h, 2, &skewed, MATCH_TOL).unwrap(), GammaValue::Infinite(InfiniteReason::RatioMismatch));
        let balanced = StateMeasure::normalized(vec![0.4, 0.4, 0.2]).unwrap();
        let v = j_level(&h, 2, &balanced, MATCH_TOL).unwrap().finite().unwrap();
        assert!(v > 0.0);
        let flat = StateMeasure::normalized(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(j_level(&h, 2, &flat, MATCH_TOL).unwrap().is_zero(1e-12));
    }
}
