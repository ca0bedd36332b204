//! Dense linear algebra helpers built on `nalgebra`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Condition numbers above this value trigger a warning.
pub const CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular linear system of size {0}")]
    Singular(usize),
}

/// Solves `a · x = b` by LU with partial pivoting.
///
/// Logs a warning when the 1-norm condition number exceeds [`CONDITION_WARN`].
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let lu = a.clone().lu();
    let inv = lu.try_inverse().ok_or(LinalgError::Singular(n))?;
    let cond = one_norm(a) * one_norm(&inv);
    if !cond.is_finite() {
        return Err(LinalgError::Singular(n));
    }
    if cond > CONDITION_WARN {
        log::warn!("ill-conditioned system: size {n}, condition number {cond:.3e}");
    }
    a.clone().lu().solve(b).ok_or(LinalgError::Singular(n))
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
///
/// Returns the eigenvalues and the matching unit eigenvectors as columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: DVector<f64> = eig.eigenvectors.column(src).into_owned();
        // Fix the sign so that the largest-magnitude entry is positive.
        let lead = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if lead < 0.0 {
            col = -col;
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 1, &[3.0, 5.0]);
        let x = solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - 0.8).abs() < 1e-14);
        assert!((x[(1, 0)] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(solve(&a, &b).is_err());
    }

    #[test]
    fn eigen_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -4.0]);
        let (vals, vecs) = symmetric_eigen(&m);
        assert_eq!(vals, alloc::vec![-4.0, 2.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }
}
