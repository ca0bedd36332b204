//! Valleys `{U ≤ U(m) + r₀}` around minima, rasterized on a grid.

use alloc::vec::Vec;

use super::SdeError;
use crate::grid::Grid;
use crate::landscape::{AnalyticLandscape, MinId};
use crate::tree::Hierarchy;

/// `r₀ = 0.4·d⁽¹⁾`, shared with the quadrature tail checks.
pub fn default_valley_depth(h: &Hierarchy) -> f64 {
    0.4 * h.levels[0].depth
}

/// The connected component of `{U ≤ U(m) + r₀}` containing `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Valley {
    pub minimum: MinId,
    pub location: Vec<f64>,
    pub level: f64,
    /// Nodal indicator of the component.
    pub indicator: Vec<f64>,
}

/// The valleys of all minima on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValleyMap {
    pub grid: Grid,
    pub depth: f64,
    pub valleys: Vec<Valley>,
}

impl ValleyMap {
    /// Rasterizes every valley and checks that each contains exactly one
    /// catalogued critical point.
    pub fn new(landscape: &AnalyticLandscape, depth: f64, nodes_per_axis: usize) -> Result<Self, SdeError> {
        if !(depth > 0.0) {
            return Err(SdeError::InvalidInput(alloc::format!("valley depth must be positive, got {depth}")));
        }
        let potential = &landscape.potential;
        let grid = Grid::new(potential.bounds(), nodes_per_axis)?;
        let u: Vec<f64> = (0..grid.len()).map(|i| potential.value(&grid.point(i))).collect();
        let mut valleys = Vec::new();
        for m in landscape.graph.min_ids() {
            let location = landscape.minimum_location(m).to_vec();
            let seed = grid
                .nearest(&location)
                .ok_or_else(|| SdeError::InvalidInput(alloc::format!("minimum {location:?} lies outside the grid")))?;
            let level = potential.value(&location) + depth;
            let below: Vec<bool> = u.iter().map(|&v| v <= level).collect();
            let mask = grid.component_of(&below, seed);
            let count =
                landscape.catalog.points.iter().filter(|c| grid.nearest(&c.location).is_some_and(|n| mask[n])).count();
            if count != 1 {
                return Err(SdeError::ValleyOverlap { minimum: landscape.graph.minimum(m).id.clone(), count });
            }
            let indicator = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            valleys.push(Valley { minimum: m, location, level, indicator });
        }
        Ok(Self { grid, depth, valleys })
    }

    /// Multilinear membership test: the interpolated indicator is at least ½.
    pub fn contains(&self, valley: usize, x: &[f64]) -> bool {
        self.grid.interpolate(&self.valleys[valley].indicator, x).is_some_and(|v| v >= 0.5)
    }

    /// The first valley among `candidates` containing `x`.
    pub fn locate(&self, candidates: &[usize], x: &[f64]) -> Option<usize> {
        candidates.iter().copied().find(|&v| self.contains(v, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{graph_from_potential, AnalysisParams, Potential};
    use crate::tree::build_hierarchy;

    #[test]
    fn double_well_valleys() {
        let a = graph_from_potential(&Potential::double_well(), &AnalysisParams::default()).unwrap();
        let h = build_hierarchy(&a.graph).unwrap();
        let r0 = default_valley_depth(&h);
        assert!((r0 - 0.4).abs() < 1e-9);
        let map = ValleyMap::new(&a, r0, 801).unwrap();
        assert_eq!(map.valleys.len(), 2);
        // (x² − 1)² ≤ 0.4 on |x² − 1| ≤ √0.4.
        let edge = libm::sqrt(1.0 + libm::sqrt(0.4));
        for v in 0..2 {
            let m = map.valleys[v].location[0];
            assert!(map.contains(v, &[m]));
            assert!(map.contains(v, &[m.signum() * (edge - 0.01)]));
            assert!(!map.contains(v, &[m.signum() * (edge + 0.01)]));
            assert!(!map.contains(v, &[0.0]));
        }
        assert_eq!(map.locate(&[0, 1], &[0.0]), None);
    }

    #[test]
    fn too_deep_valleys_swallow_the_saddle() {
        let a = graph_from_potential(&Potential::double_well(), &AnalysisParams::default()).unwrap();
        assert!(matches!(ValleyMap::new(&a, 1.5, 401), Err(SdeError::ValleyOverlap { count: 3, .. })));
    }
}
