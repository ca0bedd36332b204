//! Uniform tensor grids over axis-aligned boxes.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::landscape::Bounds;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {min} nodes per axis, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("grid dimension {0} is not supported here")]
    UnsupportedDimension(usize),
}

/// Nodes `lo_k + j·h_k`, `j = 0..n_k`, including both box faces.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    lo: Vec<f64>,
    spacing: Vec<f64>,
}

impl Grid {
    pub fn new(bounds: &Bounds, nodes_per_axis: usize) -> Result<Self, GridError> {
        if nodes_per_axis < 3 {
            return Err(GridError::TooFewNodes { min: 3, got: nodes_per_axis });
        }
        let axes = bounds.axes();
        Ok(Self {
            shape: vec![nodes_per_axis; axes.len()],
            lo: axes.iter().map(|a| a.0).collect(),
            spacing: axes.iter().map(|(lo, hi)| (hi - lo) / (nodes_per_axis - 1) as f64).collect(),
        })
    }

    /// Like [`Grid::new`] but rounds the node count up to an odd number, as
    /// composite Simpson quadrature requires.
    pub fn new_odd(bounds: &Bounds, nodes_per_axis: usize) -> Result<Self, GridError> {
        Self::new(bounds, nodes_per_axis | 1)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index stride of `axis` (axis 0 varies fastest).
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[..axis].iter().product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.shape
            .iter()
            .map(|&n| {
                let j = flat % n;
                flat /= n;
                j
            })
            .collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().enumerate().map(|(k, &j)| j * self.stride(k)).sum()
    }

    pub fn coord(&self, flat: usize, axis: usize) -> f64 {
        let j = (flat / self.stride(axis)) % self.shape[axis];
        self.lo[axis] + j as f64 * self.spacing[axis]
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.coord(flat, k)).collect()
    }

    /// Axis-aligned neighbours of a node.
    pub fn neighbors(&self, flat: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).flat_map(move |k| {
            let stride = self.stride(k);
            let j = (flat / stride) % self.shape[k];
            let down = (j > 0).then(|| flat - stride);
            let up = (j + 1 < self.shape[k]).then(|| flat + stride);
            down.into_iter().chain(up)
        })
    }

    /// The node closest to `x`, or `None` outside the grid box.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0;
        for k in 0..self.dim() {
            let t = (x[k] - self.lo[k]) / self.spacing[k];
            let n = self.shape[k];
            if !(t > -0.5 && t < n as f64 - 0.5) {
                return None;
            }
            let j = libm::round(t).clamp(0.0, (n - 1) as f64) as usize;
            flat += j * self.stride(k);
        }
        Some(flat)
    }

    /// Multilinear interpolation of nodal `values` at `x`; `None` outside.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> Option<f64> {
        let d = self.dim();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let t = (x[k] - self.lo[k]) / self.spacing[k];
            let n = self.shape[k];
            if !(0.0..=(n - 1) as f64).contains(&t) {
                return None;
            }
            let j = (libm::floor(t) as usize).min(n - 2);
            base[k] = j;
            frac[k] = t - j as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for k in 0..d {
                let bit = (corner >> k) & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                flat += (base[k] + bit) * self.stride(k);
            }
            if w != 0.0 {
                acc += w * values[flat];
            }
        }
        Some(acc)
    }

    /// Connected components of `mask` under axis adjacency. Nodes outside the
    /// mask get `None`; labels are numbered in order of first node.
    pub fn components(&self, mask: &[bool]) -> (Vec<Option<usize>>, usize) {
        let mut label = vec![None; self.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.len() {
            if !mask[start] || label[start].is_some() {
                continue;
            }
            label[start] = Some(count);
            stack.push(start);
            while let Some(i) = stack.pop() {
                for j in self.neighbors(i) {
                    if mask[j] && label[j].is_none() {
                        label[j] = Some(count);
                        stack.push(j);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// The connected component of `mask` containing `seed`.
    pub fn component_of(&self, mask: &[bool], seed: usize) -> Vec<bool> {
        let mut out = vec![false; self.len()];
        if !mask[seed] {
            return out;
        }
        out[seed] = true;
        let mut stack = vec![seed];
        while let Some(i) = stack.pop() {
            for j in self.neighbors(i) {
                if mask[j] && !out[j] {
                    out[j] = true;
                    stack.push(j);
                }
            }
        }
        out
    }

    /// Tensor-product composite Simpson weights (odd node counts) including
    /// the cell volume.
    pub fn simpson_weights(&self) -> Vec<f64> {
        let axis_weights: Vec<Vec<f64>> =
            self.shape.iter().zip(&self.spacing).map(|(&n, &h)| simpson_1d(n, h)).collect();
        (0..self.len())
            .map(|flat| {
                let mut rem = flat;
                axis_weights
                    .iter()
                    .zip(&self.shape)
                    .map(|(w, &n)| {
                        let j = rem % n;
                        rem /= n;
                        w[j]
                    })
                    .product()
            })
            .collect()
    }
}

/// Composite Simpson weights on `n` nodes with spacing `h`; an even `n`
/// closes the last interval with the trapezoid rule.
pub fn simpson_1d(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let odd_end = if n % 2 == 1 { n } else { n - 1 };
    for j in 0..odd_end {
        w[j] = if j == 0 || j == odd_end - 1 {
            h / 3.0
        } else if j % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    if odd_end < n {
        w[n - 2] += 0.5 * h;
        w[n - 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubics() {
        let b = Bounds::cube(1, 0.0, 2.0).unwrap();
        let g = Grid::new(&b, 11).unwrap();
        let w = g.simpson_weights();
        let s: f64 = (0..g.len()).map(|i| w[i] * libm::pow(g.coord(i, 0), 3.0)).sum();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn components_split() {
        let b = Bounds::cube(1, 0.0, 1.0).unwrap();
        let g = Grid::new(&b, 7).unwrap();
        let mask = [true, true, false, true, false, true, true];
        let (labels, count) = g.components(&mask);
        assert_eq!(count, 3);
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[3], labels[5]);
    }

    #[test]
    fn bilinear_interpolation() {
        let b = Bounds::cube(2, 0.0, 1.0).unwrap();
        let g = Grid::new(&b, 3).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| g.coord(i, 0) + 2.0 * g.coord(i, 1)).collect();
        let v = g.interpolate(&vals, &[0.3, 0.7]).unwrap();
        assert!((v - 1.7).abs() < 1e-14);
        assert!(g.interpolate(&vals, &[1.2, 0.0]).is_none());
    }
}
