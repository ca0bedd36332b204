//! Grid sublevel-filtration estimate of communication heights.

use alloc::vec::Vec;
use petgraph::unionfind::UnionFind;

use super::{LandscapeError, Potential};
use crate::grid::Grid;

/// Grid estimate of a communication height with its resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridHeight {
    pub height: f64,
    /// Largest height difference between adjacent nodes; the estimate is
    /// within this of the continuum value when both ends are resolved.
    pub resolution: f64,
}

/// Adds grid nodes in increasing `U` and reports the level at which the
/// nodes nearest `a` and `b` join one component. `None` if they never do.
pub fn grid_communication_height(
    potential: &Potential,
    nodes_per_axis: usize,
    a: &[f64],
    b: &[f64],
) -> Result<Option<GridHeight>, LandscapeError> {
    let grid = Grid::new(potential.bounds(), nodes_per_axis)
        .map_err(|e| LandscapeError::InvalidPotential(alloc::format!("{e}")))?;
    let values: Vec<f64> = (0..grid.len()).map(|i| potential.value(&grid.point(i))).collect();
    let (Some(na), Some(nb)) = (grid.nearest(a), grid.nearest(b)) else {
        return Err(LandscapeError::InvalidPotential("endpoint outside the box".into()));
    };
    let resolution = (0..grid.len())
        .flat_map(|i| grid.neighbors(i).map(move |j| (i, j)))
        .map(|(i, j)| (values[i] - values[j]).abs())
        .fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut active = alloc::vec![false; grid.len()];
    let mut uf = UnionFind::<usize>::new(grid.len());
    for &i in &order {
        active[i] = true;
        for j in grid.neighbors(i) {
            if active[j] {
                uf.union(i, j);
            }
        }
        if active[na] && active[nb] && uf.equiv(na, nb) {
            return Ok(Some(GridHeight { height: values[i], resolution }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_barrier_on_grid() {
        let g = grid_communication_height(&Potential::double_well(), 401, &[-1.0], &[1.0]).unwrap().unwrap();
        assert!((g.height - 1.0).abs() <= g.resolution);
    }
}
