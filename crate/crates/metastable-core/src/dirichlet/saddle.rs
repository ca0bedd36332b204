//! Boxes around index-one saddles and the one-dimensional equilibrium
//! profile across them.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use super::{DirichletError, GibbsQuadrature};
use crate::landscape::{CriticalKind, CriticalPoint};

/// The box around a saddle on the scale `δ = √(ε log(1/ε))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleGeometry {
    pub center: Vec<f64>,
    /// Unit eigenvectors as columns; the first spans the unstable direction.
    pub frame: DMatrix<f64>,
    /// Absolute Hessian eigenvalues in the order of `frame`.
    pub curvatures: Vec<f64>,
    pub eps: f64,
    pub delta: f64,
    /// Box size multiplier, the smallest integer with `J² > d + 10`.
    pub j: f64,
    /// Box half-widths along each frame vector.
    pub half_widths: Vec<f64>,
    /// `∫_{−L}^{L} e^{−λ₁t²/2ε}dt` with `L` the unstable half-width.
    pub normalizer: f64,
}

impl SaddleGeometry {
    pub fn new(saddle: &CriticalPoint, eps: f64) -> Result<Self, DirichletError> {
        if saddle.kind != CriticalKind::Saddle {
            return Err(DirichletError::InvalidInput("the box is built around an index-one saddle".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(DirichletError::InvalidInput(alloc::format!("temperature must lie in (0, 1), got {eps}")));
        }
        let d = saddle.location.len();
        let delta = libm::sqrt(eps * libm::log(1.0 / eps));
        let j = libm::ceil(libm::sqrt(d as f64 + 11.0));
        let curvatures: Vec<f64> = saddle.eigenvalues.iter().map(|l| l.abs()).collect();
        let half_widths: Vec<f64> = curvatures
            .iter()
            .enumerate()
            .map(|(k, &l)| if k == 0 { j * delta / libm::sqrt(l) } else { 2.0 * j * delta / libm::sqrt(l) })
            .collect();
        let lambda1 = curvatures[0];
        let normalizer =
            libm::sqrt(2.0 * PI * eps / lambda1) * libm::erf(half_widths[0] * libm::sqrt(lambda1 / (2.0 * eps)));
        Ok(Self {
            center: saddle.location.clone(),
            frame: saddle.eigenvectors.clone(),
            curvatures,
            eps,
            delta,
            j,
            half_widths,
            normalizer,
        })
    }

    /// Flips the unstable direction so that it points toward `target`.
    pub fn oriented_toward(mut self, target: &[f64]) -> Self {
        let along: f64 =
            self.frame.column(0).iter().zip(target.iter().zip(&self.center)).map(|(e, (t, c))| e * (t - c)).sum();
        if along < 0.0 {
            self.frame.column_mut(0).neg_mut();
        }
        self
    }

    /// Coordinates of `x − σ` in the eigenframe.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        (0..self.frame.ncols())
            .map(|k| self.frame.column(k).iter().zip(x.iter().zip(&self.center)).map(|(e, (a, c))| e * (a - c)).sum())
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.coordinates(x).iter().zip(&self.half_widths).all(|(a, w)| a.abs() <= *w)
    }

    /// `c_ε / √(2πε/λ₁)`.
    pub fn normalizer_ratio(&self) -> f64 {
        self.normalizer / libm::sqrt(2.0 * PI * self.eps / self.curvatures[0])
    }

    fn erf_scale(&self) -> f64 {
        libm::sqrt(self.curvatures[0] / (2.0 * self.eps))
    }

    /// Gradient of the profile at `x`; zero outside the unstable slab.
    pub fn profile_gradient(&self, x: &[f64]) -> Vec<f64> {
        let a1 = self.coordinates(x)[0];
        if a1.abs() > self.half_widths[0] {
            return alloc::vec![0.0; x.len()];
        }
        let slope = libm::exp(-self.curvatures[0] * a1 * a1 / (2.0 * self.eps)) / self.normalizer;
        self.frame.column(0).iter().map(|e| slope * e).collect()
    }
}

/// `(1/c_ε)∫_{−L}^{α₁} e^{−λ₁t²/2ε}dt`, clamped to `[0, 1]` outside the box.
pub fn saddle_profile(geometry: &SaddleGeometry, x: &[f64]) -> f64 {
    let l = geometry.half_widths[0];
    let a1 = geometry.coordinates(x)[0].clamp(-l, l);
    let s = geometry.erf_scale();
    let full = libm::erf(l * s);
    ((libm::erf(a1 * s) + full) / (2.0 * full)).clamp(0.0, 1.0)
}

/// `e^{H/ε}θ_ε ε∫_B |∇p_ε|² dπ_ε` with `B` the box intersected with the
/// component of `{U < U(σ) + J²δ²}` containing the saddle.
pub fn capacity_integral(
    q: &GibbsQuadrature,
    geometry: &SaddleGeometry,
    log_theta: f64,
    height: f64,
) -> Result<f64, DirichletError> {
    let grid = q.grid();
    let eps = q.eps();
    let seed = grid
        .nearest(&geometry.center)
        .ok_or_else(|| DirichletError::InvalidInput("saddle lies outside the quadrature box".into()))?;
    let level = q.potential().value(&geometry.center) + geometry.j * geometry.j * geometry.delta * geometry.delta;
    let below: Vec<bool> = q.u().iter().map(|&u| u < level).collect();
    let component = grid.component_of(&below, seed);
    let lambda1 = geometry.curvatures[0];
    let l = geometry.half_widths[0];
    let log_prefactor = height / eps + log_theta + libm::log(eps / (geometry.normalizer * geometry.normalizer));
    let total = (0..grid.len())
        .filter(|&i| component[i])
        .filter_map(|i| {
            let x = grid.point(i);
            let alpha = geometry.coordinates(&x);
            if !alpha.iter().zip(&geometry.half_widths).all(|(a, w)| a.abs() <= *w) || alpha[0].abs() > l {
                return None;
            }
            let exponent = log_prefactor + q.log_density(i) - lambda1 * alpha[0] * alpha[0] / eps;
            Some(q.weights()[i] * libm::exp(exponent))
        })
        .sum();
    Ok(total)
}
