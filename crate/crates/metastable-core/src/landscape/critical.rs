//! Critical points: Newton search, Hessian classification and point weights.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};

use super::{LandscapeError, Potential};
use crate::linalg::symmetric_eigen;

/// Morse type of a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Saddle,
    /// Index two or more.
    HigherIndex(usize),
}

/// A nondegenerate critical point with its Hessian spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub value: f64,
    /// Hessian eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub index: usize,
    pub kind: CriticalKind,
}

impl CriticalPoint {
    /// Eigenvector of the `k`-th smallest eigenvalue.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }
}

/// Parameters of the seeded Newton search.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSearch {
    /// Seeds per axis on a uniform grid over the box.
    pub grid_n: usize,
    /// Gradient sup-norm accepted as converged.
    pub grad_tol: f64,
    /// Eigenvalues with absolute value at or below this are degenerate.
    pub morse_tol: f64,
    pub max_newton: usize,
    /// Deduplication radius as a fraction of the box diameter.
    pub dedupe_fraction: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        Self { grid_n: 41, grad_tol: 1e-10, morse_tol: 1e-8, max_newton: 60, dedupe_fraction: 1e-6 }
    }
}

/// Result of a critical-point search.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalCatalog {
    /// Minima first, then saddles, then higher-index points; each group sorted
    /// lexicographically by location.
    pub points: Vec<CriticalPoint>,
    /// Seeds whose Newton iteration stalled or left the box.
    pub skipped_seeds: usize,
}

impl CriticalCatalog {
    pub fn minima(&self) -> impl Iterator<Item = (usize, &CriticalPoint)> {
        self.points.iter().enumerate().filter(|(_, c)| c.kind == CriticalKind::Minimum)
    }

    pub fn saddles(&self) -> impl Iterator<Item = (usize, &CriticalPoint)> {
        self.points.iter().enumerate().filter(|(_, c)| c.kind == CriticalKind::Saddle)
    }

    /// Index of the catalog point within `radius` of `x`, if any.
    pub fn nearest_within(&self, x: &[f64], radius: f64) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, c)| (i, distance(&c.location, x)))
            .filter(|&(_, d)| d <= radius)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Classifies the critical point at `x` from its Hessian.
pub fn classify(potential: &Potential, x: &[f64], morse_tol: f64) -> Result<CriticalPoint, LandscapeError> {
    let (eigenvalues, eigenvectors) = symmetric_eigen(&potential.hessian(x));
    if eigenvalues.iter().any(|l| l.abs() <= morse_tol) {
        return Err(LandscapeError::NonMorse { location: x.to_vec(), eigenvalues });
    }
    let index = eigenvalues.iter().filter(|&&l| l < 0.0).count();
    let kind = match index {
        0 => CriticalKind::Minimum,
        1 => CriticalKind::Saddle,
        k => CriticalKind::HigherIndex(k),
    };
    Ok(CriticalPoint { location: x.to_vec(), value: potential.value(x), eigenvalues, eigenvectors, index, kind })
}

/// Newton iteration on `∇U = 0` from `seed`; `None` when it stalls or leaves the box.
fn newton(potential: &Potential, seed: &[f64], params: &CriticalSearch) -> Option<Vec<f64>> {
    let diam = potential.bounds().diameter();
    let mut x = seed.to_vec();
    let mut converged_at = None;
    for it in 0..params.max_newton {
        let g = potential.gradient(&x);
        if sup_norm(&g) <= params.grad_tol && converged_at.is_none() {
            converged_at = Some(it);
        }
        // A few polishing steps after convergence.
        if converged_at.is_some_and(|c| it >= c + 3) {
            break;
        }
        let h = potential.hessian(&x);
        let rhs = -DVector::from_vec(g);
        let step = h.lu().solve(&rhs)?;
        let mut step: Vec<f64> = step.iter().copied().collect();
        let norm = libm::sqrt(step.iter().map(|s| s * s).sum());
        if !norm.is_finite() {
            return None;
        }
        if norm > 0.25 * diam {
            let s = 0.25 * diam / norm;
            step.iter_mut().for_each(|v| *v *= s);
        }
        x.iter_mut().zip(&step).for_each(|(xi, si)| *xi += si);
        if !potential.bounds().contains(&x) && potential.bounds().distance_to_edge(&x) < -0.5 * diam {
            return None;
        }
    }
    let g = potential.gradient(&x);
    if sup_norm(&g) > params.grad_tol {
        return None;
    }
    let margin = 1e-9 * diam;
    if potential.bounds().distance_to_edge(&x) < -margin {
        return None;
    }
    Some(x)
}

fn seeds(potential: &Potential, grid_n: usize) -> Vec<Vec<f64>> {
    let axes = potential.bounds().axes();
    let dim = axes.len();
    let n = grid_n.max(1);
    let coord = |k: usize, j: usize| {
        let (lo, hi) = axes[k];
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * j as f64 / (n - 1) as f64
        }
    };
    let total = n.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            (0..dim)
                .map(|k| {
                    let j = flat % n;
                    flat /= n;
                    coord(k, j)
                })
                .collect()
        })
        .collect()
}

/// Finds, deduplicates and classifies the critical points of `potential` in its box.
///
/// Seeds that fail to converge are skipped with a warning; a converged point
/// with a Hessian eigenvalue of magnitude at most `morse_tol` is an error.
pub fn find_critical_points(potential: &Potential, params: &CriticalSearch) -> Result<CriticalCatalog, LandscapeError> {
    let radius = params.dedupe_fraction * potential.bounds().diameter();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut skipped = 0usize;
    for seed in seeds(potential, params.grid_n) {
        match newton(potential, &seed, params) {
            Some(x) => {
                if !found.iter().any(|y| distance(y, &x) <= radius) {
                    found.push(x);
                }
            }
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} Newton seeds did not converge and were skipped");
    }
    let mut points = found.iter().map(|x| classify(potential, x, params.morse_tol)).collect::<Result<Vec<_>, _>>()?;
    points.sort_by(|a, b| {
        a.index.cmp(&b.index).then_with(|| {
            a.location
                .iter()
                .zip(&b.location)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
    });
    Ok(CriticalCatalog { points, skipped_seeds: skipped })
}

/// `1/√(Π λ_k)` for a minimum's Hessian spectrum.
pub fn nu_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64, LandscapeError> {
    if eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(LandscapeError::WrongKind("weight nu requires a local minimum"));
    }
    Ok(1.0 / libm::sqrt(eigenvalues.iter().product()))
}

/// `λ₁ / (2π √(−Π λ_k))` for a saddle's Hessian spectrum.
pub fn ek_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64, LandscapeError> {
    let negatives = eigenvalues.iter().filter(|&&l| l < 0.0).count();
    if negatives != 1 {
        return Err(LandscapeError::WrongKind("weight omega requires an index-one saddle"));
    }
    let unstable = -eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let det: f64 = eigenvalues.iter().product();
    Ok(unstable / (2.0 * PI * libm::sqrt(-det)))
}

/// Sum of the absolute values of the negative eigenvalues.
pub fn zeta_from_eigenvalues(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&l| -(l.min(0.0))).sum()
}

/// Minimum weight `ν(m)`.
pub fn nu_weight(point: &CriticalPoint) -> Result<f64, LandscapeError> {
    if point.kind != CriticalKind::Minimum {
        return Err(LandscapeError::WrongKind("weight nu requires a local minimum"));
    }
    nu_from_eigenvalues(&point.eigenvalues)
}

/// Eyring–Kramers weight `ω(σ)`.
pub fn ek_weight(point: &CriticalPoint) -> Result<f64, LandscapeError> {
    if point.kind != CriticalKind::Saddle {
        return Err(LandscapeError::WrongKind("weight omega requires an index-one saddle"));
    }
    ek_from_eigenvalues(&point.eigenvalues)
}

/// `ζ(c)`, the total magnitude of the unstable curvature at `c`.
pub fn zeta(point: &CriticalPoint) -> f64 {
    zeta_from_eigenvalues(&point.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::Potential;

    #[test]
    fn weights_from_spectra() {
        assert!((nu_from_eigenvalues(&[8.0]).unwrap() - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(nu_from_eigenvalues(&[1.0, 1.0]).unwrap(), 1.0);
        assert!((nu_from_eigenvalues(&[8.0, 2.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((ek_from_eigenvalues(&[-4.0]).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((ek_from_eigenvalues(&[-4.0, 2.0]).unwrap() - 0.225_079_079_039_276_6).abs() < 1e-12);
        let exact = ek_from_eigenvalues(&[-2.0 * PI, 1.0 / (2.0 * PI)]).unwrap();
        assert!((exact - 1.0).abs() < 1e-15);
        assert_eq!(zeta_from_eigenvalues(&[-4.0, 2.0]), 4.0);
        assert_eq!(zeta_from_eigenvalues(&[8.0]), 0.0);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        assert!(nu_from_eigenvalues(&[-1.0]).is_err());
        assert!(ek_from_eigenvalues(&[1.0, 2.0]).is_err());
        assert!(ek_from_eigenvalues(&[-1.0, -2.0]).is_err());
    }

    #[test]
    fn quadratic_has_single_minimum() {
        let u = Potential::quadratic(1, 1.0).unwrap();
        let cat = find_critical_points(&u, &CriticalSearch::default()).unwrap();
        assert_eq!(cat.points.len(), 1);
        assert_eq!(cat.points[0].kind, CriticalKind::Minimum);
        assert!(cat.points[0].location[0].abs() < 1e-12);
        assert!((cat.points[0].eigenvalues[0] - 2.0).abs() < 1e-12);
    }
}
