//! Gaussian-like measures concentrating at a point, for the order `−1`
//! functional.

use alloc::vec;
use alloc::vec::Vec;

use super::{DensityKind, DirichletError, GibbsQuadrature, TestDensity};

/// A measure `∝ e^{−V/ε}` concentrating at `x0` and its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Premetastable {
    pub density: TestDensity,
    /// Radius of the quadratic core of `V`.
    pub core_radius: f64,
    /// Lower bound enforced on `V` outside twice the core radius.
    pub ramp_height: f64,
    /// `ε·I_ε(μ)` from the discrete Dirichlet form.
    pub value: f64,
    /// `ε·I_ε(μ) = ¼∫|∇U − ∇V|²dμ` from analytic gradients.
    pub exact: f64,
    /// `¼|∇U(x0)|²`.
    pub limit: f64,
}

/// `V(y) = r²` for `r = |y − x0| ≤ a`, plus `K((r − a)/a)³` beyond, and its
/// gradient.
fn confining(y: &[f64], x0: &[f64], a: f64, k: f64) -> (f64, Vec<f64>) {
    let diff: Vec<f64> = y.iter().zip(x0).map(|(u, v)| u - v).collect();
    let r = libm::sqrt(diff.iter().map(|v| v * v).sum());
    let mut value = r * r;
    let mut scale = 2.0;
    if r > a {
        let t = (r - a) / a;
        value += k * t * t * t;
        scale += 3.0 * k * t * t / (a * r);
    }
    (value, diff.iter().map(|v| scale * v).collect())
}

/// Builds the density `∝ e^{−V/ε}`, where `V` is quadratic near `x0` and
/// dominates `|y|² + |∇U|² + |ΔU|` away from it.
pub fn premetastable_density(q: &GibbsQuadrature, x0: &[f64]) -> Result<Premetastable, DirichletError> {
    let potential = q.potential();
    let grid = q.grid();
    let edge = potential.bounds().distance_to_edge(x0);
    if x0.len() != potential.dim() || !(edge > 0.0) {
        return Err(DirichletError::InvalidInput(alloc::format!("{x0:?} is not inside the box")));
    }
    let a = edge.min(0.5) / 2.0;
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let grads: Vec<Vec<f64>> = points.iter().map(|y| potential.gradient(y)).collect();
    let ramp_height = points
        .iter()
        .zip(&grads)
        .map(|(y, g)| {
            let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
            sq(y) + sq(g) + potential.laplacian(y).abs()
        })
        .fold(0.0, f64::max);
    let eps = q.eps();
    let mut log_psi = vec![0.0; grid.len()];
    let mut mismatch = vec![0.0; grid.len()];
    for (i, y) in points.iter().enumerate() {
        let (v, grad_v) = confining(y, x0, a, ramp_height);
        log_psi[i] = -v / (2.0 * eps);
        mismatch[i] = 0.25 * grads[i].iter().zip(&grad_v).map(|(gu, gv)| (gu - gv) * (gu - gv)).sum::<f64>();
    }
    let density = TestDensity::from_log_psi(q, DensityKind::Premeta, log_psi)?;
    let value = eps * density.dirichlet_form(q);
    let exact = density.expectation(q, &mismatch);
    let limit = 0.25 * potential.gradient(x0).iter().map(|g| g * g).sum::<f64>();
    Ok(Premetastable { density, core_radius: a, ramp_height, value, exact, limit })
}
