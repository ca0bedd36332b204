//! Landscape graphs derived from analytic potentials.

use alloc::format;
use alloc::vec::Vec;

use super::critical::{ek_weight, find_critical_points, nu_weight, CriticalCatalog, CriticalSearch};
use super::descent::{heteroclinic_targets, DescentParams};
use super::graph::{LandscapeGraph, MinId, MinimumNode, SaddleNode, GRAPH_HEIGHT_TOL};
use super::{LandscapeError, Potential};

/// Relative tolerance used to cluster numerically computed heights.
pub const ANALYTIC_HEIGHT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisParams {
    pub search: CriticalSearch,
    pub descent: DescentParams,
    pub cluster_rel_tol: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            search: CriticalSearch::default(),
            descent: DescentParams::default(),
            cluster_rel_tol: ANALYTIC_HEIGHT_REL_TOL,
        }
    }
}

/// A potential together with its critical points and derived graph.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticLandscape {
    pub potential: Potential,
    pub catalog: CriticalCatalog,
    pub graph: LandscapeGraph,
    /// Catalog index of each graph minimum.
    pub minimum_points: Vec<usize>,
    /// Catalog index of each graph saddle.
    pub saddle_points: Vec<usize>,
}

impl AnalyticLandscape {
    pub fn minimum_location(&self, m: MinId) -> &[f64] {
        &self.catalog.points[self.minimum_points[m.0]].location
    }
}

/// Replaces heights that agree up to `rel_tol` by the lowest member of
/// their cluster.
fn cluster_heights(heights: &mut [f64], rel_tol: f64) {
    let mut order: Vec<usize> = (0..heights.len()).collect();
    order.sort_by(|&a, &b| heights[a].total_cmp(&heights[b]));
    let mut anchor = f64::NAN;
    for &i in &order {
        let h = heights[i];
        if anchor.is_finite() && (h - anchor).abs() <= rel_tol * anchor.abs().max(1.0) {
            heights[i] = anchor;
        } else {
            anchor = h;
        }
    }
}

/// Finds critical points, links each saddle to its descent targets and
/// assembles the landscape graph with `ν` and `ω` weights.
pub fn graph_from_potential(
    potential: &Potential,
    params: &AnalysisParams,
) -> Result<AnalyticLandscape, LandscapeError> {
    let catalog = find_critical_points(potential, &params.search)?;
    let minimum_points: Vec<usize> = catalog.minima().map(|(i, _)| i).collect();
    let saddle_points: Vec<usize> = catalog.saddles().map(|(i, _)| i).collect();
    if minimum_points.is_empty() {
        return Err(LandscapeError::InvalidPotential("no local minimum in the box".into()));
    }
    let mut heights: Vec<f64> = minimum_points.iter().chain(&saddle_points).map(|&i| catalog.points[i].value).collect();
    cluster_heights(&mut heights, params.cluster_rel_tol);
    let minima = minimum_points
        .iter()
        .enumerate()
        .map(|(k, &i)| Ok(MinimumNode { id: format!("m{k}"), height: heights[k], nu: nu_weight(&catalog.points[i])? }))
        .collect::<Result<Vec<_>, LandscapeError>>()?;
    let mut saddles = Vec::with_capacity(saddle_points.len());
    for (k, &i) in saddle_points.iter().enumerate() {
        let ends = heteroclinic_targets(potential, &catalog, i, &params.descent)?;
        let to_min = |c: usize| {
            minimum_points
                .iter()
                .position(|&p| p == c)
                .map(MinId)
                .ok_or(LandscapeError::WrongKind("descent ended outside the minima list"))
        };
        saddles.push(SaddleNode {
            id: format!("s{k}"),
            height: heights[minimum_points.len() + k],
            omega: ek_weight(&catalog.points[i])?,
            connects: [to_min(ends[0])?, to_min(ends[1])?],
        });
    }
    let graph = LandscapeGraph::new(minima, saddles, GRAPH_HEIGHT_TOL)?;
    Ok(AnalyticLandscape { potential: potential.clone(), catalog, graph, minimum_points, saddle_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Height;

    #[test]
    fn double_well_graph() {
        let land = graph_from_potential(&Potential::double_well(), &AnalysisParams::default()).unwrap();
        let g = &land.graph;
        assert_eq!(g.min_count(), 2);
        assert_eq!(g.saddles().len(), 1);
        assert_eq!(g.minimum(MinId(0)).height, g.minimum(MinId(1)).height);
        match g.theta(MinId(0), MinId(1)) {
            Height::Finite(h) => assert!((h - 1.0).abs() < 1e-9),
            Height::Infinite => panic!("wells must communicate"),
        }
    }

    #[test]
    fn clustering_snaps_close_heights() {
        let mut h = [1.0, 1.0 + 1e-11, 0.5, 2.0];
        cluster_heights(&mut h, 1e-9);
        assert_eq!(h, [1.0, 1.0, 0.5, 2.0]);
    }
}
