//! Occupation histograms of sample paths and the Gibbs reference masses.

use alloc::vec;
use alloc::vec::Vec;

use super::{SamplePath, SdeError};
use crate::chain::StateMeasure;
use crate::landscape::{Bounds, Potential};

/// A regular partition of a box into `bins_per_axis^d` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBins {
    bounds: Bounds,
    per_axis: usize,
}

impl HistogramBins {
    pub fn new(bounds: Bounds, per_axis: usize) -> Result<Self, SdeError> {
        if per_axis == 0 {
            return Err(SdeError::InvalidInput("at least one bin per axis is required".into()));
        }
        Ok(Self { bounds, per_axis })
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.bounds.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn width(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds.axes()[axis];
        (hi - lo) / self.per_axis as f64
    }

    /// The cell containing `x` (first axis fastest), or `None` outside.
    pub fn index(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0;
        let mut stride = 1;
        for (k, &(lo, hi)) in self.bounds.axes().iter().enumerate() {
            if !(x[k] >= lo && x[k] <= hi) {
                return None;
            }
            let j = (((x[k] - lo) / self.width(k)) as usize).min(self.per_axis - 1);
            flat += j * stride;
            stride *= self.per_axis;
        }
        Some(flat)
    }

    /// Lower corner of cell `flat`.
    pub fn corner(&self, mut flat: usize) -> Vec<f64> {
        self.bounds
            .axes()
            .iter()
            .enumerate()
            .map(|(k, &(lo, _))| {
                let j = flat % self.per_axis;
                flat /= self.per_axis;
                lo + j as f64 * self.width(k)
            })
            .collect()
    }
}

/// Fraction of samples (after `burn_in`) in each cell, pooled over paths.
pub fn empirical_histogram(paths: &[SamplePath], bins: &HistogramBins, burn_in: f64) -> Result<StateMeasure, SdeError> {
    let mut counts = vec![0.0; bins.len()];
    for path in paths {
        for x in path.after(burn_in) {
            if let Some(b) = bins.index(x) {
                counts[b] += 1.0;
            }
        }
    }
    Ok(StateMeasure::normalized(counts)?)
}

/// Cell masses of `π_ε ∝ e^{−U/ε}` by the midpoint rule on `sub` subcells
/// per axis.
pub fn gibbs_bin_masses(
    potential: &Potential,
    eps: f64,
    bins: &HistogramBins,
    sub: usize,
) -> Result<StateMeasure, SdeError> {
    if !(eps > 0.0) || sub == 0 {
        return Err(SdeError::InvalidInput(alloc::format!("need eps > 0 and sub ≥ 1, got {eps} and {sub}")));
    }
    let d = potential.dim();
    let h: Vec<f64> = (0..d).map(|k| bins.width(k) / sub as f64).collect();
    let cells = sub.pow(d as u32);
    let mut log_mass = Vec::with_capacity(bins.len());
    for b in 0..bins.len() {
        let corner = bins.corner(b);
        let mut exponents = Vec::with_capacity(cells);
        for c in 0..cells {
            let mut rest = c;
            let x: Vec<f64> = (0..d)
                .map(|k| {
                    let j = rest % sub;
                    rest /= sub;
                    corner[k] + (j as f64 + 0.5) * h[k]
                })
                .collect();
            exponents.push(-potential.value(&x) / eps);
        }
        let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        log_mass.push(top + libm::log(exponents.iter().map(|e| libm::exp(e - top)).sum::<f64>()));
    }
    let top = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(StateMeasure::normalized(log_mass.iter().map(|l| libm::exp(l - top)).collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_indexing() {
        let bins = HistogramBins::new(Bounds::cube(2, 0.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(bins.len(), 16);
        assert_eq!(bins.index(&[0.1, 0.1]), Some(0));
        assert_eq!(bins.index(&[0.3, 0.1]), Some(1));
        assert_eq!(bins.index(&[0.1, 0.3]), Some(4));
        assert_eq!(bins.index(&[1.0, 1.0]), Some(15));
        assert_eq!(bins.index(&[1.1, 0.5]), None);
        assert_eq!(bins.corner(6), vec![0.5, 0.25]);
    }

    #[test]
    fn gibbs_masses_of_a_gaussian() {
        // U = x² at ε = 2 is the standard normal law.
        let u = Potential::quadratic(1, 6.0).unwrap();
        let bins = HistogramBins::new(u.bounds().clone(), 12).unwrap();
        let masses = gibbs_bin_masses(&u, 2.0, &bins, 50).unwrap();
        let phi = |x: f64| 0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2));
        for (b, &m) in masses.weights().iter().enumerate() {
            let lo = -6.0 + b as f64;
            assert!((m - (phi(lo + 1.0) - phi(lo))).abs() < 1e-4, "bin {b}: {m}");
        }
    }
}
