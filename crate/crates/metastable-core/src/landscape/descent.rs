//! Steepest-descent integration from saddles to their heteroclinic targets.

use alloc::vec::Vec;

use super::critical::{distance, CriticalCatalog, CriticalKind};
use super::{LandscapeError, Potential};

/// Parameters of the adaptive RK4 descent.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentParams {
    /// Initial displacement along the unstable eigenvector.
    pub offset: f64,
    /// A path ends once it is this close to a catalogued critical point.
    pub capture_tol: f64,
    pub max_steps: usize,
}

impl Default for DescentParams {
    fn default() -> Self {
        Self { offset: 1e-4, capture_tol: 1e-7, max_steps: 200_000 }
    }
}

fn rk4_step(potential: &Potential, x: &[f64], h: f64) -> Vec<f64> {
    let d = x.len();
    let field = |y: &[f64]| -> Vec<f64> { potential.gradient(y).into_iter().map(|g| -g).collect() };
    let shifted = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { (0..d).map(|i| y[i] + s * k[i]).collect() };
    let k1 = field(x);
    let k2 = field(&shifted(x, &k1, 0.5 * h));
    let k3 = field(&shifted(x, &k2, 0.5 * h));
    let k4 = field(&shifted(x, &k3, h));
    (0..d).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Follows `ẋ = −∇U(x)` from `start` until it is captured by a catalogued
/// critical point; returns that point's catalog index.
pub fn descend(
    potential: &Potential,
    catalog: &CriticalCatalog,
    start: &[f64],
    params: &DescentParams,
) -> Result<usize, LandscapeError> {
    let stiffness = catalog.points.iter().flat_map(|c| c.eigenvalues.iter()).fold(1.0f64, |m, l| m.max(l.abs()));
    let max_step = 1.0 / stiffness;
    let mut h = 0.1 * max_step;
    let mut x = start.to_vec();
    let mut u = potential.value(&x);
    for _ in 0..params.max_steps {
        if let Some(idx) = catalog.nearest_within(&x, params.capture_tol) {
            return Ok(idx);
        }
        let next = rk4_step(potential, &x, h);
        let un = potential.value(&next);
        if un > u + 1e-15 * u.abs().max(1.0) {
            h *= 0.5;
            if h < 1e-14 * max_step {
                return Err(LandscapeError::DescentStalled { location: x });
            }
            continue;
        }
        x = next;
        u = un;
        if !potential.bounds().contains(&x) {
            return Err(LandscapeError::Diverged { location: x });
        }
        h = (h * 1.5).min(max_step);
    }
    Err(LandscapeError::DescentStalled { location: x })
}

/// The two minima reached by steepest descent from `σ ± offset·e₁`.
///
/// The first entry is the target on the `+e₁` side. Either branch ending at a
/// critical point that is not a minimum violates the heteroclinic assumption.
pub fn heteroclinic_targets(
    potential: &Potential,
    catalog: &CriticalCatalog,
    saddle: usize,
    params: &DescentParams,
) -> Result<[usize; 2], LandscapeError> {
    let sigma = catalog.points.get(saddle).ok_or(LandscapeError::WrongKind("saddle index out of range"))?;
    if sigma.kind != CriticalKind::Saddle {
        return Err(LandscapeError::WrongKind("heteroclinic targets require an index-one saddle"));
    }
    let e1 = sigma.eigenvector(0);
    let mut targets = [0usize; 2];
    for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
        let start: Vec<f64> = sigma.location.iter().zip(&e1).map(|(s, e)| s + sign * params.offset * e).collect();
        let idx = descend(potential, catalog, &start, params)?;
        let end = &catalog.points[idx];
        if end.kind != CriticalKind::Minimum {
            return Err(LandscapeError::AssumptionViolated {
                saddle: sigma.location.clone(),
                reached: end.location.clone(),
            });
        }
        debug_assert!(distance(&end.location, &sigma.location) > params.capture_tol);
        targets[slot] = idx;
    }
    Ok(targets)
}
