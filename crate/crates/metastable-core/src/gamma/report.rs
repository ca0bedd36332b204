//! All orders of the expansion for one measure.

use alloc::vec::Vec;

use super::{j_level, j_level_points, j_minus1, j_zero, GammaError, GammaValue, PointMeasure, ZERO_TOL};
use crate::chain::StateMeasure;
use crate::landscape::AnalyticLandscape;
use crate::tree::Hierarchy;

/// The speed `θ_ε` dividing an order's functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScale {
    /// `θ = ε` (order −1).
    Epsilon,
    /// `θ = 1` (order 0).
    Unit,
    /// `θ = e^{depth/ε}` (orders `p ≥ 1`).
    Exponential { depth: f64 },
}

impl TimeScale {
    pub fn theta(self, eps: f64) -> f64 {
        match self {
            TimeScale::Epsilon => eps,
            TimeScale::Unit => 1.0,
            TimeScale::Exponential { depth } => libm::exp(depth / eps),
        }
    }
}

/// A measure either in the state space or directly over the minima.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaMeasure {
    Points(PointMeasure),
    Minima(StateMeasure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelValue {
    /// −1, 0, then the hierarchy levels.
    pub order: i64,
    pub scale: TimeScale,
    pub value: GammaValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub levels: Vec<LevelValue>,
    /// Index into `levels` of the first order whose value is not zero.
    pub leading: Option<usize>,
    /// `(ε, J/θ_ε)` for the leading order; zero when every order vanishes.
    pub reconstruction: Vec<(f64, f64)>,
}

/// Evaluates every order and the leading-order approximation of the rate
/// functional at each `ε`.
///
/// A positive finite value at order `p` forces `+∞` at order `p + 1`, so the
/// full sum is infinite past the leading order; only that term is kept.
pub fn expansion_report(
    h: &Hierarchy,
    landscape: Option<&AnalyticLandscape>,
    mu: &GammaMeasure,
    match_tol: f64,
    eps_list: &[f64],
) -> Result<GammaReport, GammaError> {
    let mut levels = Vec::with_capacity(h.q() + 2);
    let (minus1, zero) = match mu {
        GammaMeasure::Points(points) => {
            let a = landscape.ok_or(GammaError::NeedsLandscape)?;
            (GammaValue::Finite(j_minus1(&a.potential, points)?), j_zero(&a.catalog, points, match_tol))
        }
        // Atoms on minima have zero gradient and no negative curvature.
        GammaMeasure::Minima(_) => (GammaValue::Finite(0.0), GammaValue::Finite(0.0)),
    };
    levels.push(LevelValue { order: -1, scale: TimeScale::Epsilon, value: minus1 });
    levels.push(LevelValue { order: 0, scale: TimeScale::Unit, value: zero });
    for level in &h.levels {
        let value = match mu {
            GammaMeasure::Points(points) => {
                j_level_points(h, landscape.ok_or(GammaError::NeedsLandscape)?, level.p, points, match_tol)?
            }
            GammaMeasure::Minima(weights) => j_level(h, level.p, weights, match_tol)?,
        };
        levels.push(LevelValue { order: level.p as i64, scale: TimeScale::Exponential { depth: level.depth }, value });
    }
    let leading = levels.iter().position(|l| !l.value.is_zero(ZERO_TOL));
    let reconstruction = eps_list
        .iter()
        .map(|&eps| {
            let term = leading.map_or(0.0, |i| levels[i].value.as_f64() / levels[i].scale.theta(eps));
            (eps, term)
        })
        .collect();
    Ok(GammaReport { levels, leading, reconstruction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::{InfiniteReason, MATCH_TOL};
    use crate::landscape::{graph_from_potential, AnalysisParams, Potential};
    use crate::tree::build_hierarchy;
    use alloc::vec;

    fn setup() -> (AnalyticLandscape, Hierarchy) {
        let a = graph_from_potential(&Potential::double_well(), &AnalysisParams::default()).unwrap();
        let h = build_hierarchy(&a.graph).unwrap();
        (a, h)
    }

    fn report(x: &[(f64, f64)]) -> GammaReport {
        let (a, h) = setup();
        let mu = PointMeasure::new(x.iter().map(|&(p, w)| (vec![p], w)).collect()).unwrap();
        expansion_report(&h, Some(&a), &GammaMeasure::Points(mu), MATCH_TOL, &[0.1, 0.05]).unwrap()
    }

    #[test]
    fn stationary_measure_vanishes_everywhere() {
        let r = report(&[(-1.0, 0.5), (1.0, 0.5)]);
        assert!(r.levels.iter().all(|l| l.value.is_zero(ZERO_TOL)));
        assert_eq!(r.leading, None);
        assert!(r.reconstruction.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn saddle_measure_leads_at_order_zero() {
        let r = report(&[(0.0, 1.0)]);
        assert!(r.levels[0].value.is_zero(1e-20));
        assert!((r.levels[1].value.as_f64() - 4.0).abs() < 1e-9);
        assert_eq!(r.levels[2].value, GammaValue::Infinite(InfiniteReason::OffSupport));
        assert_eq!(r.leading, Some(1));
    }

    #[test]
    fn regular_point_leads_at_order_minus_one() {
        let r = report(&[(0.5, 1.0)]);
        assert!((r.levels[0].value.as_f64() - 0.5625).abs() < 1e-15);
        assert!(r.levels[1..].iter().all(|l| !l.value.is_finite()));
        assert!((r.reconstruction[0].1 - 5.625).abs() < 1e-12);
    }

    #[test]
    fn well_measure_leads_at_order_one() {
        let r = report(&[(-1.0, 1.0)]);
        assert_eq!(r.leading, Some(2));
        let (eps, v) = r.reconstruction[1];
        let expected = r.levels[2].value.as_f64() * libm::exp(-1.0 / eps);
        assert!((v - expected).abs() <= 1e-12 * expected);
    }
}
