//! Closed-form Gaussian moments used to validate the quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use super::DirichletError;
use crate::grid::Grid;
use crate::landscape::Bounds;

/// Small-temperature limits of the normalized Gaussian integrals:
/// `g(0)f(0)/√det A` for the mass and `g(0)·Tr(BA⁻¹)/√det A` for the
/// quadratic moment.
pub fn gaussian_limits(a: &DMatrix<f64>, b: &DMatrix<f64>, g0: f64, f0: f64) -> Result<(f64, f64), DirichletError> {
    let d = a.nrows();
    if a.ncols() != d || b.nrows() != d || b.ncols() != d {
        return Err(DirichletError::InvalidInput("matrices must be square of equal size".into()));
    }
    let det = a.determinant();
    let inv = a
        .clone()
        .try_inverse()
        .filter(|_| det > 0.0)
        .ok_or_else(|| DirichletError::InvalidInput("the quadratic form must be positive-definite".into()))?;
    let root = libm::sqrt(det);
    Ok((g0 * f0 / root, g0 * (b * inv).trace() / root))
}

/// `∫_{−δ}^{δ} e^{−a t²/2ε} dt` and `∫_{−δ}^{δ} t² e^{−a t²/2ε} dt`.
fn axis_moments(a: f64, delta: f64, eps: f64) -> (f64, f64) {
    let m0 = libm::sqrt(2.0 * PI * eps / a) * libm::erf(delta * libm::sqrt(a / (2.0 * eps)));
    let m2 = eps / a * (m0 - 2.0 * delta * libm::exp(-a * delta * delta / (2.0 * eps)));
    (m0, m2)
}

/// Exact mass and quadratic moment of `e^{−x·Ax/2ε}` over `[−δ, δ]^d`
/// for diagonal `A` and `B`, normalized like [`gaussian_limits`].
pub fn truncated_gaussian_moments(a_diag: &[f64], b_diag: &[f64], delta: f64, eps: f64) -> (f64, f64) {
    let axes: Vec<(f64, f64)> = a_diag.iter().map(|&a| axis_moments(a, delta, eps)).collect();
    let mass: f64 = axes.iter().map(|m| m.0).product();
    let moment: f64 = (0..axes.len()).map(|k| b_diag[k] * axes[k].1 * mass / axes[k].0).sum();
    let unit = libm::pow(2.0 * PI * eps, a_diag.len() as f64 / 2.0);
    (mass / unit, moment / (eps * unit))
}

/// Quadrature of the truncated Gaussian integrals against their closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCheck {
    pub numeric: (f64, f64),
    pub exact: (f64, f64),
    pub limit: (f64, f64),
    /// Largest absolute difference between `numeric` and `exact`.
    pub error: f64,
}

/// Integrates `e^{−x·Ax/2ε}` and `x·Bx·e^{−x·Ax/2ε}` over `[−δ, δ]^d` by
/// Simpson's rule and compares with [`truncated_gaussian_moments`].
///
/// Requires `√ε < δ ≤ 1`, the window in which the limits hold.
pub fn validate_gaussian_quadrature(
    a_diag: &[f64],
    b_diag: &[f64],
    delta: f64,
    eps: f64,
    nodes_per_axis: usize,
) -> Result<GaussianCheck, DirichletError> {
    let d = a_diag.len();
    if !(1..=2).contains(&d) {
        return Err(DirichletError::UnsupportedDimension(d));
    }
    if b_diag.len() != d || a_diag.iter().any(|&a| !(a > 0.0)) || b_diag.iter().any(|&b| !(b >= 0.0)) {
        return Err(DirichletError::InvalidInput("need positive A and nonnegative B of equal size".into()));
    }
    let sqrt_eps = libm::sqrt(eps);
    if !(delta > sqrt_eps && delta <= 1.0) {
        return Err(DirichletError::ScaleViolation { delta, lower: sqrt_eps, upper: 1.0 });
    }
    let bounds = Bounds::cube(d, -delta, delta)?;
    let grid = Grid::new_odd(&bounds, nodes_per_axis)?;
    let w = grid.simpson_weights();
    let (mut mass, mut moment) = (0.0, 0.0);
    for i in 0..grid.len() {
        let x = grid.point(i);
        let quad_a: f64 = x.iter().zip(a_diag).map(|(v, a)| a * v * v).sum();
        let quad_b: f64 = x.iter().zip(b_diag).map(|(v, b)| b * v * v).sum();
        let e = w[i] * libm::exp(-quad_a / (2.0 * eps));
        mass += e;
        moment += e * quad_b;
    }
    let unit = libm::pow(2.0 * PI * eps, d as f64 / 2.0);
    let numeric = (mass / unit, moment / (eps * unit));
    let exact = truncated_gaussian_moments(a_diag, b_diag, delta, eps);
    let limit =
        gaussian_limits(&DMatrix::from_diagonal(&a_diag.into()), &DMatrix::from_diagonal(&b_diag.into()), 1.0, 1.0)?;
    let error = (numeric.0 - exact.0).abs().max((numeric.1 - exact.1).abs());
    Ok(GaussianCheck { numeric, exact, limit, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_match_closed_forms() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(gaussian_limits(&one, &one, 1.0, 1.0).unwrap().0, 1.0);
        let two = DMatrix::from_element(1, 1, 2.0);
        let (_, m) = gaussian_limits(&two, &one, 1.0, 1.0).unwrap();
        assert!((m - 0.5 / libm::sqrt(2.0)).abs() < 1e-15);
        assert!(gaussian_limits(&DMatrix::from_element(1, 1, -1.0), &one, 1.0, 1.0).is_err());
    }

    #[test]
    fn quadrature_agrees_with_truncated_forms() {
        for &eps in &[0.1, 0.05, 0.02, 0.01, 0.005] {
            let delta = libm::pow(eps, 0.4);
            let c1 = validate_gaussian_quadrature(&[2.0], &[1.0], delta, eps, 801).unwrap();
            assert!(c1.error < 1e-6, "1d ε={eps}: {c1:?}");
            let c2 = validate_gaussian_quadrature(&[2.0, 5.0], &[1.0, 3.0], delta, eps, 401).unwrap();
            assert!(c2.error < 1e-6, "2d ε={eps}: {c2:?}");
        }
    }

    #[test]
    fn truncated_forms_approach_limits() {
        let (m, q) = truncated_gaussian_moments(&[2.0, 5.0], &[1.0, 3.0], 0.5, 1e-4);
        let det = libm::sqrt(10.0);
        assert!((m - 1.0 / det).abs() < 1e-12);
        assert!((q - (0.5 + 0.6) / det).abs() < 1e-12);
    }

    #[test]
    fn small_window_is_rejected() {
        let r = validate_gaussian_quadrature(&[1.0], &[1.0], 0.05, 0.01, 101);
        assert!(matches!(r, Err(DirichletError::ScaleViolation { .. })));
    }
}
