//! Composite Simpson quadrature against the Gibbs measure `e^{−U/ε}/Z_ε`.

use alloc::vec::Vec;

use super::DirichletError;
use crate::grid::Grid;
use crate::landscape::Potential;

/// Largest accepted estimate of the Gibbs mass outside the box.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-3;

/// The construction a test density came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Premeta,
    Critical,
    Metastable,
}

impl core::fmt::Display for DensityKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            DensityKind::Premeta => "premeta",
            DensityKind::Critical => "critical",
            DensityKind::Metastable => "metastable",
        })
    }
}

/// Nodes, Simpson weights and Gibbs log-densities of a potential on its box.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsQuadrature {
    potential: Potential,
    eps: f64,
    grid: Grid,
    u: Vec<f64>,
    weights: Vec<f64>,
    /// `ln(dπ_ε/dx)` at every node.
    log_pi: Vec<f64>,
    log_z: f64,
    boundary_mass: f64,
}

impl GibbsQuadrature {
    /// Builds the quadrature on `nodes_per_axis` nodes (rounded up to odd).
    pub fn new(potential: &Potential, eps: f64, nodes_per_axis: usize) -> Result<Self, DirichletError> {
        let grid = Grid::new_odd(potential.bounds(), nodes_per_axis)?;
        Self::with_grid(potential, eps, grid)
    }

    pub fn with_grid(potential: &Potential, eps: f64, grid: Grid) -> Result<Self, DirichletError> {
        let d = potential.dim();
        if !(1..=2).contains(&d) {
            return Err(DirichletError::UnsupportedDimension(d));
        }
        if grid.dim() != d {
            return Err(DirichletError::InvalidInput(alloc::format!(
                "grid dimension {} does not match potential dimension {d}",
                grid.dim()
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(DirichletError::InvalidInput(alloc::format!("temperature must be positive, got {eps}")));
        }
        let u: Vec<f64> = (0..grid.len()).map(|i| potential.value(&grid.point(i))).collect();
        let weights = grid.simpson_weights();
        let u_ref = u.iter().copied().fold(f64::INFINITY, f64::min);
        let shifted: f64 = u.iter().zip(&weights).map(|(&ui, &w)| w * libm::exp(-(ui - u_ref) / eps)).sum();
        let log_z = libm::log(shifted) - u_ref / eps;
        let log_pi: Vec<f64> = u.iter().map(|&ui| -ui / eps - log_z).collect();
        let mut q = Self { potential: potential.clone(), eps, grid, u, weights, log_pi, log_z, boundary_mass: 0.0 };
        q.boundary_mass = q.exterior_mass_estimate();
        if !(q.boundary_mass < BOUNDARY_MASS_LIMIT) {
            return Err(DirichletError::CutoffViolated { boundary_mass: q.boundary_mass });
        }
        Ok(q)
    }

    /// Laplace estimate `∮ π ε/∂_n U dS` of the mass beyond the box faces;
    /// infinite where the potential decreases outward.
    fn exterior_mass_estimate(&self) -> f64 {
        let g = &self.grid;
        let d = g.dim();
        let axis_weights: Vec<Vec<f64>> = (0..d).map(|k| crate::grid::simpson_1d(g.shape()[k], g.spacing(k))).collect();
        let mut total = 0.0;
        let mut grad = alloc::vec![0.0; d];
        for i in 0..g.len() {
            let idx = g.multi_index(i);
            for k in 0..d {
                let outward = if idx[k] == 0 {
                    -1.0
                } else if idx[k] + 1 == g.shape()[k] {
                    1.0
                } else {
                    continue;
                };
                self.potential.gradient_into(&g.point(i), &mut grad);
                let surface: f64 = (0..d).filter(|&j| j != k).map(|j| axis_weights[j][idx[j]]).product();
                let slope = outward * grad[k];
                let density = libm::exp(self.log_pi[i]);
                if density == 0.0 {
                    continue;
                }
                if slope <= 0.0 {
                    return f64::INFINITY;
                }
                total += surface * density * self.eps / slope;
            }
        }
        total
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Potential values at the nodes.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn z(&self) -> f64 {
        libm::exp(self.log_z)
    }

    /// Estimated Gibbs mass outside the box.
    pub fn boundary_mass(&self) -> f64 {
        self.boundary_mass
    }

    /// `ln(dπ_ε/dx)` at node `i`.
    pub fn log_density(&self, i: usize) -> f64 {
        self.log_pi[i]
    }

    /// Smallest potential value on the box faces.
    pub fn cutoff_level(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&i| g.multi_index(i).iter().zip(g.shape()).any(|(&j, &n)| j == 0 || j + 1 == n))
            .map(|i| self.u[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_k (∂_k F)²` at node `i` by central differences (one-sided on the
    /// faces), where `value(j)` gives `F` at node `j`.
    fn grad_sq(&self, i: usize, value: impl Fn(usize) -> f64) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.dim() {
            let stride = g.stride(k);
            let j = (i / stride) % g.shape()[k];
            let (lo, hi) = (if j > 0 { i - stride } else { i }, if j + 1 < g.shape()[k] { i + stride } else { i });
            let span = (hi - lo) / stride;
            let dk = (value(hi) - value(lo)) / (span as f64 * g.spacing(k));
            s += dk * dk;
        }
        s
    }

    /// `ε∫|∇f|²dπ_ε` for a nodal function `f`.
    pub fn dirichlet_form(&self, f: &[f64]) -> f64 {
        self.scaled_dirichlet_form(f, 0.0)
    }

    /// `e^{log_scale}·ε∫|∇f|²dπ_ε`, with the scale folded into each node's
    /// weight so that large prefactors do not overflow.
    pub fn scaled_dirichlet_form(&self, f: &[f64], log_scale: f64) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let w = libm::exp(log_scale + libm::log(self.weights[i]) + self.log_pi[i]);
                if w == 0.0 {
                    0.0
                } else {
                    w * self.eps * self.grad_sq(i, |j| f[j])
                }
            })
            .sum()
    }

    /// `e^{log_scale}·∫g dπ_ε` over the nodes where `mask` holds.
    pub fn scaled_integral(&self, g: &[f64], log_scale: f64, mask: Option<&[bool]>) -> f64 {
        (0..self.grid.len())
            .filter(|&i| mask.is_none_or(|m| m[i]))
            .map(|i| {
                let w = libm::exp(log_scale + libm::log(self.weights[i]) + self.log_pi[i]);
                if w == 0.0 {
                    0.0
                } else {
                    w * g[i]
                }
            })
            .sum()
    }

    /// `∫g dπ_ε`.
    pub fn expectation(&self, g: &[f64]) -> f64 {
        self.scaled_integral(g, 0.0, None)
    }
}

/// `Z_ε = ∫e^{−U/ε}dx` over the potential's box.
pub fn partition_function(potential: &Potential, eps: f64, nodes_per_axis: usize) -> Result<f64, DirichletError> {
    Ok(GibbsQuadrature::new(potential, eps, nodes_per_axis)?.z())
}

/// A probability density `μ` on the grid, stored through `ln ψ` with
/// `ψ² = dμ/dx`, so that `f = ψ/√π_ε` satisfies `∫f²dπ_ε = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDensity {
    kind: DensityKind,
    log_psi: Vec<f64>,
}

impl TestDensity {
    /// Normalizes `ln ψ` (up to an additive constant) so that `∫ψ² = 1`.
    pub fn from_log_psi(q: &GibbsQuadrature, kind: DensityKind, mut log_psi: Vec<f64>) -> Result<Self, DirichletError> {
        if log_psi.len() != q.grid.len() {
            return Err(DirichletError::InvalidInput(alloc::format!(
                "density has {} nodes, grid has {}",
                log_psi.len(),
                q.grid.len()
            )));
        }
        let peak = log_psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(DirichletError::EmptyDensity);
        }
        let mass: f64 = log_psi.iter().zip(&q.weights).map(|(&l, &w)| w * libm::exp(2.0 * (l - peak))).sum();
        let shift = peak + 0.5 * libm::log(mass);
        for l in &mut log_psi {
            *l -= shift;
        }
        Ok(Self { kind, log_psi })
    }

    /// Builds the density with `f` proportional to the given nodal values.
    pub fn from_f(q: &GibbsQuadrature, kind: DensityKind, f: &[f64]) -> Result<Self, DirichletError> {
        if let Some(bad) = f.iter().find(|v| !(**v >= 0.0)) {
            return Err(DirichletError::InvalidInput(alloc::format!("test function value {bad} is negative")));
        }
        let log_psi = f.iter().zip(&q.log_pi).map(|(&v, &lp)| libm::log(v) + 0.5 * lp).collect();
        Self::from_log_psi(q, kind, log_psi)
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn log_psi(&self) -> &[f64] {
        &self.log_psi
    }

    /// `dμ/dx` at the nodes.
    pub fn density(&self) -> Vec<f64> {
        self.log_psi.iter().map(|&l| libm::exp(2.0 * l)).collect()
    }

    /// `f = √(dμ/dπ_ε)` at the nodes; may overflow where `π_ε` underflows.
    pub fn f(&self, q: &GibbsQuadrature) -> Vec<f64> {
        self.log_psi.iter().zip(&q.log_pi).map(|(&l, &lp)| libm::exp(l - 0.5 * lp)).collect()
    }

    /// `|∫f²dπ_ε − 1|`.
    pub fn normalization_error(&self, q: &GibbsQuadrature) -> f64 {
        (self.mass(q, None) - 1.0).abs()
    }

    /// `μ` of the nodes selected by `mask` (all nodes for `None`).
    pub fn mass(&self, q: &GibbsQuadrature, mask: Option<&[bool]>) -> f64 {
        (0..self.log_psi.len())
            .filter(|&i| mask.is_none_or(|m| m[i]))
            .map(|i| q.weights[i] * libm::exp(2.0 * self.log_psi[i]))
            .sum()
    }

    /// `∫g dμ`.
    pub fn expectation(&self, q: &GibbsQuadrature, g: &[f64]) -> f64 {
        (0..self.log_psi.len()).map(|i| q.weights[i] * libm::exp(2.0 * self.log_psi[i]) * g[i]).sum()
    }

    /// `I_ε(μ) = ε∫|∇f|²dπ_ε` written as `ε∫ψ²|∇ln f|²dx`.
    ///
    /// `ln f = ln ψ + U/2ε + const` is smooth where `ψ > 0`, so its central
    /// differences stay accurate even when `f` varies on the scale `ε`.
    /// Where `ψ` vanishes, `f√π_ε` is differenced relative to the node.
    pub fn dirichlet_form(&self, q: &GibbsQuadrature) -> f64 {
        let eps = q.eps;
        let g = &q.grid;
        (0..g.len())
            .map(|i| {
                let ui = q.u[i];
                let li = self.log_psi[i];
                let mut s = 0.0;
                for k in 0..g.dim() {
                    let stride = g.stride(k);
                    let j = (i / stride) % g.shape()[k];
                    let lo = if j > 0 { i - stride } else { i };
                    let hi = if j + 1 < g.shape()[k] { i + stride } else { i };
                    let width = ((hi - lo) / stride) as f64 * g.spacing(k);
                    let rel = |m: usize| self.log_psi[m] - li + (q.u[m] - ui) / (2.0 * eps);
                    let dk = if li.is_finite() && self.log_psi[lo].is_finite() && self.log_psi[hi].is_finite() {
                        libm::exp(li) * (rel(hi) - rel(lo)) / width
                    } else {
                        let value = |m: usize| libm::exp(self.log_psi[m] + (q.u[m] - ui) / (2.0 * eps));
                        (value(hi) - value(lo)) / width
                    };
                    s += dk * dk;
                }
                q.weights[i] * eps * s
            })
            .sum()
    }
}
