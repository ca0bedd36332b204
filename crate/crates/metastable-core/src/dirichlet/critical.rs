//! Measures concentrating at a critical point on the intermediate scale
//! `√ε ≪ δ ≪ ε^{1/3}`, for the order-zero functional.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::{DensityKind, DirichletError, GibbsQuadrature, TestDensity};
use crate::grid::Grid;
use crate::landscape::{zeta, Bounds, CriticalPoint, Potential};

/// Radius (relative to the cutoff radius) below which the bump equals one.
pub const BUMP_PLATEAU: f64 = 0.75;

/// `e^{−1/t}/(e^{−1/t} + e^{−1/(1−t)})` on `(0, 1)`.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = libm::exp(-1.0 / t);
    let b = libm::exp(-1.0 / (1.0 - t));
    a / (a + b)
}

fn smoothstep_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = smoothstep(t);
    s * (1.0 - s) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)))
}

/// Smooth radial cutoff: one on `r ≤ BUMP_PLATEAU`, zero on `r ≥ 1`.
pub fn bump(r: f64) -> f64 {
    1.0 - smoothstep((r - BUMP_PLATEAU) / (1.0 - BUMP_PLATEAU))
}

/// Radial derivative of [`bump`].
pub fn bump_derivative(r: f64) -> f64 {
    -smoothstep_derivative((r - BUMP_PLATEAU) / (1.0 - BUMP_PLATEAU)) / (1.0 - BUMP_PLATEAU)
}

/// The three parts of the Dirichlet form of the critical-scale measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSplit {
    pub delta: f64,
    /// Curvature term; approaches the sum of the negative Hessian
    /// eigenvalues in absolute value.
    pub phi1: f64,
    /// Cutoff gradient term; vanishes in the limit.
    pub phi2: f64,
    /// Cross term; vanishes in the limit.
    pub phi3: f64,
    pub zeta: f64,
}

impl CriticalSplit {
    pub fn total(&self) -> f64 {
        self.phi1 + self.phi2 + self.phi3
    }
}

/// `H̃ = Σ_{λ<0} λ e eᵀ` from the Hessian spectrum.
fn negative_part(point: &CriticalPoint) -> DMatrix<f64> {
    let d = point.eigenvalues.len();
    let mut h = DMatrix::zeros(d, d);
    for (k, &l) in point.eigenvalues.iter().enumerate() {
        if l < 0.0 {
            let e: DVector<f64> = point.eigenvectors.column(k).into_owned();
            h += l * &e * e.transpose();
        }
    }
    h
}

fn scale(eps: f64, delta_exp: f64) -> Result<f64, DirichletError> {
    let delta = libm::pow(eps, delta_exp);
    if !(delta_exp > 1.0 / 3.0 && delta_exp < 0.5) {
        return Err(DirichletError::ScaleViolation { delta, lower: libm::sqrt(eps), upper: libm::cbrt(eps) });
    }
    Ok(delta)
}

/// Per-node ingredients: the log-weight `(G − (U − U(c)))/ε`, the cutoff
/// `φ_ε`, its gradient, and `H̃y` with `y = x − c`.
struct Local {
    log_weight: f64,
    phi: f64,
    grad_phi: Vec<f64>,
    h_y: Vec<f64>,
}

fn local(potential: &Potential, point: &CriticalPoint, h: &DMatrix<f64>, x: &[f64], eps: f64, delta: f64) -> Local {
    let y = DVector::from_iterator(x.len(), x.iter().zip(&point.location).map(|(a, b)| a - b));
    let hy = h * &y;
    let g = y.dot(&hy);
    let r = y.norm();
    let phi = bump(r / delta);
    let radial = if r > 0.0 { bump_derivative(r / delta) / (delta * r) } else { 0.0 };
    Local {
        log_weight: (g - (potential.value(x) - point.value)) / eps,
        phi,
        grad_phi: y.iter().map(|v| radial * v).collect(),
        h_y: hy.iter().copied().collect(),
    }
}

/// Evaluates `Φ^(1)`, `Φ^(2)`, `Φ^(3)` by Simpson quadrature over the box
/// `c + [−δ, δ]^d` with `δ = ε^{delta_exp}`.
pub fn critical_split(
    potential: &Potential,
    point: &CriticalPoint,
    eps: f64,
    delta_exp: f64,
    nodes_per_axis: usize,
) -> Result<CriticalSplit, DirichletError> {
    let d = potential.dim();
    if !(1..=2).contains(&d) {
        return Err(DirichletError::UnsupportedDimension(d));
    }
    let delta = scale(eps, delta_exp)?;
    let bounds = Bounds::new(point.location.iter().map(|&c| (c - delta, c + delta)).collect())?;
    let grid = Grid::new_odd(&bounds, nodes_per_axis)?;
    let w = grid.simpson_weights();
    let h = negative_part(point);
    let nodes: Vec<Local> = (0..grid.len()).map(|i| local(potential, point, &h, &grid.point(i), eps, delta)).collect();
    let peak = nodes.iter().filter(|n| n.phi > 0.0).map(|n| n.log_weight).fold(f64::NEG_INFINITY, f64::max);
    let (mut a, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for (n, &wi) in nodes.iter().zip(&w) {
        let e = wi * libm::exp(n.log_weight - peak);
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        a += e * n.phi * n.phi;
        s1 += e * n.phi * n.phi * dot(&n.h_y, &n.h_y);
        s2 += e * dot(&n.grad_phi, &n.grad_phi);
        s3 += e * n.phi * dot(&n.grad_phi, &n.h_y);
    }
    Ok(CriticalSplit { delta, phi1: s1 / (eps * a), phi2: eps * s2 / a, phi3: 2.0 * s3 / a, zeta: zeta(point) })
}

/// The critical-scale measure `∝ e^{G/ε}φ_ε² dπ_ε` on the global grid.
pub fn critical_density(
    q: &GibbsQuadrature,
    point: &CriticalPoint,
    delta_exp: f64,
) -> Result<TestDensity, DirichletError> {
    let eps = q.eps();
    let delta = scale(eps, delta_exp)?;
    let h = negative_part(point);
    let grid = q.grid();
    let log_psi = (0..grid.len())
        .map(|i| {
            let n = local(q.potential(), point, &h, &grid.point(i), eps, delta);
            // log_weight/2 − U(c)/2ε differs from (G − U)/2ε by a constant.
            0.5 * n.log_weight + libm::log(n.phi)
        })
        .collect();
    TestDensity::from_log_psi(q, DensityKind::Critical, log_psi)
}
