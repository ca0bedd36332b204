//! Polynomial potentials on axis-aligned boxes.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::LandscapeError;

/// One term `coef · Π x_k^{powers[k]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// A multivariate polynomial with analytic gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
    max_power: u32,
}

fn ipow(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..p {
        acc *= x;
    }
    acc
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self, LandscapeError> {
        if dim == 0 {
            return Err(LandscapeError::InvalidPotential("dimension must be positive".into()));
        }
        for t in &terms {
            if t.powers.len() != dim {
                return Err(LandscapeError::InvalidPotential(alloc::format!(
                    "term has {} exponents, expected {dim}",
                    t.powers.len()
                )));
            }
            if !t.coef.is_finite() {
                return Err(LandscapeError::InvalidPotential("non-finite coefficient".into()));
            }
        }
        let terms: Vec<Monomial> = terms.into_iter().filter(|t| t.coef != 0.0).collect();
        let max_power = terms.iter().flat_map(|t| t.powers.iter().copied()).max().unwrap_or(0);
        Ok(Self { dim, terms, max_power })
    }

    /// `Σ coeffs[k] x^k` in one variable.
    pub fn univariate(coeffs: &[f64]) -> Result<Self, LandscapeError> {
        let terms = coeffs.iter().enumerate().map(|(k, &c)| Monomial { coef: c, powers: vec![k as u32] }).collect();
        Self::new(1, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Table `pw[k * (max_power + 1) + j] = x_k^j`.
    fn powers(&self, x: &[f64]) -> Vec<f64> {
        let stride = self.max_power as usize + 1;
        let mut pw = vec![1.0; self.dim * stride];
        for k in 0..self.dim {
            for j in 1..stride {
                pw[k * stride + j] = pw[k * stride + j - 1] * x[k];
            }
        }
        pw
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if self.dim == 1 {
            return self.terms.iter().map(|t| t.coef * ipow(x[0], t.powers[0])).sum();
        }
        let stride = self.max_power as usize + 1;
        let pw = self.powers(x);
        self.terms
            .iter()
            .map(|t| t.powers.iter().enumerate().fold(t.coef, |acc, (k, &p)| acc * pw[k * stride + p as usize]))
            .sum()
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        if self.dim == 1 {
            for t in &self.terms {
                let p = t.powers[0];
                if p > 0 {
                    out[0] += t.coef * p as f64 * ipow(x[0], p - 1);
                }
            }
            return;
        }
        let stride = self.max_power as usize + 1;
        let pw = self.powers(x);
        for t in &self.terms {
            for (k, g) in out.iter_mut().enumerate() {
                let pk = t.powers[k];
                if pk == 0 {
                    continue;
                }
                let mut term = t.coef * pk as f64;
                for (j, &pj) in t.powers.iter().enumerate() {
                    let e = if j == k { pj - 1 } else { pj };
                    term *= pw[j * stride + e as usize];
                }
                *g += term;
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let stride = self.max_power as usize + 1;
        let pw = self.powers(x);
        let mut h = DMatrix::zeros(d, d);
        for t in &self.terms {
            for a in 0..d {
                for b in a..d {
                    let (pa, pb) = (t.powers[a], t.powers[b]);
                    let factor = if a == b {
                        if pa < 2 {
                            continue;
                        }
                        (pa * (pa - 1)) as f64
                    } else {
                        if pa == 0 || pb == 0 {
                            continue;
                        }
                        (pa * pb) as f64
                    };
                    let mut term = t.coef * factor;
                    for (j, &pj) in t.powers.iter().enumerate() {
                        let mut e = pj;
                        if j == a {
                            e -= 1;
                        }
                        if j == b {
                            e -= 1;
                        }
                        term *= pw[j * stride + e as usize];
                    }
                    h[(a, b)] += term;
                    if a != b {
                        h[(b, a)] += term;
                    }
                }
            }
        }
        h
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.hessian(x).trace()
    }

    /// Product of two polynomials of equal dimension.
    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, LandscapeError> {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Monomial {
                    coef: a.coef * b.coef,
                    powers: a.powers.iter().zip(&b.powers).map(|(p, q)| p + q).collect(),
                });
            }
        }
        Polynomial::new(self.dim, terms)
    }

    /// Sum of two polynomials of equal dimension.
    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, LandscapeError> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial::new(self.dim, terms)
    }
}

/// Axis-aligned box `Π [lo_k, hi_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    axes: Vec<(f64, f64)>,
}

impl Bounds {
    pub fn new(axes: Vec<(f64, f64)>) -> Result<Self, LandscapeError> {
        if axes.is_empty() {
            return Err(LandscapeError::InvalidPotential("empty box".into()));
        }
        for &(lo, hi) in &axes {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(LandscapeError::InvalidPotential(alloc::format!("invalid box axis [{lo}, {hi}]")));
            }
        }
        Ok(Self { axes })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, LandscapeError> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[(f64, f64)] {
        &self.axes
    }

    pub fn diameter(&self) -> f64 {
        libm::sqrt(self.axes.iter().map(|(lo, hi)| (hi - lo) * (hi - lo)).sum())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.axes.iter().zip(x).all(|(&(lo, hi), &v)| v >= lo && v <= hi)
    }

    /// Distance from `x` to the nearest face (non-positive outside).
    pub fn distance_to_edge(&self, x: &[f64]) -> f64 {
        self.axes.iter().zip(x).map(|(&(lo, hi), &v)| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min)
    }
}

/// A named polynomial potential restricted to a search/quadrature box.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    name: String,
    poly: Polynomial,
    bounds: Bounds,
}

impl Potential {
    pub fn new(name: impl Into<String>, poly: Polynomial, bounds: Bounds) -> Result<Self, LandscapeError> {
        if poly.dim() != bounds.dim() {
            return Err(LandscapeError::InvalidPotential(alloc::format!(
                "polynomial dimension {} does not match box dimension {}",
                poly.dim(),
                bounds.dim()
            )));
        }
        Ok(Self { name: name.into(), poly, bounds })
    }

    /// `(x² − 1)²` on `[−2, 2]`.
    pub fn double_well() -> Self {
        let poly = Polynomial::univariate(&[1.0, 0.0, -2.0, 0.0, 1.0]).expect("valid coefficients");
        Self::new("double_well", poly, Bounds::cube(1, -2.0, 2.0).expect("valid box")).expect("consistent dimensions")
    }

    /// `(x² − 1)² + y²` on `[−2, 2]²`.
    pub fn double_well_2d() -> Self {
        let poly = Polynomial::new(
            2,
            vec![
                Monomial { coef: 1.0, powers: vec![0, 0] },
                Monomial { coef: -2.0, powers: vec![2, 0] },
                Monomial { coef: 1.0, powers: vec![4, 0] },
                Monomial { coef: 1.0, powers: vec![0, 2] },
            ],
        )
        .expect("valid terms");
        Self::new("double_well_2d", poly, Bounds::cube(2, -2.0, 2.0).expect("valid box"))
            .expect("consistent dimensions")
    }

    /// `|x|²` in `dim` dimensions on `[−half_width, half_width]^dim`.
    pub fn quadratic(dim: usize, half_width: f64) -> Result<Self, LandscapeError> {
        let terms = (0..dim)
            .map(|k| {
                let mut powers = vec![0; dim];
                powers[k] = 2;
                Monomial { coef: 1.0, powers }
            })
            .collect();
        let poly = Polynomial::new(dim, terms)?;
        Self::new("quadratic", poly, Bounds::cube(dim, -half_width, half_width)?)
    }

    /// One-dimensional multiwell `scale · Π (x − c_i)² + tilt · x`.
    ///
    /// The box extends one unit beyond the outermost centers.
    pub fn multiwell(centers: &[f64], scale: f64, tilt: f64) -> Result<Self, LandscapeError> {
        if centers.len() < 2 {
            return Err(LandscapeError::InvalidPotential("multiwell needs at least two centers".into()));
        }
        let mut poly = Polynomial::univariate(&[scale])?;
        for &c in centers {
            poly = poly.mul(&Polynomial::univariate(&[c * c, -2.0 * c, 1.0])?)?;
        }
        poly = poly.add(&Polynomial::univariate(&[0.0, tilt])?)?;
        let lo = centers.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        Self::new("multiwell", poly, Bounds::cube(1, lo, hi)?)
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self, LandscapeError> {
        if bounds.dim() != self.poly.dim() {
            return Err(LandscapeError::InvalidPotential("box dimension mismatch".into()));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.poly.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.poly.gradient(x)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.poly.gradient_into(x, out)
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        self.poly.hessian(x)
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.poly.laplacian(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_derivatives() {
        let u = Potential::double_well();
        assert_eq!(u.value(&[0.0]), 1.0);
        assert_eq!(u.gradient(&[0.5]), vec![-1.5]);
        assert_eq!(u.hessian(&[1.0])[(0, 0)], 8.0);
        assert_eq!(u.hessian(&[0.0])[(0, 0)], -4.0);
    }

    #[test]
    fn mixed_partials() {
        // x² y³
        let p = Polynomial::new(2, vec![Monomial { coef: 1.0, powers: vec![2, 3] }]).unwrap();
        let x = [1.5, -0.5];
        let h = p.hessian(&x);
        assert!((h[(0, 0)] - 2.0 * (-0.125)).abs() < 1e-14);
        assert!((h[(0, 1)] - 6.0 * 1.5 * 0.25).abs() < 1e-14);
        assert!((h[(1, 1)] - 6.0 * 2.25 * (-0.5)).abs() < 1e-14);
        let g = p.gradient(&x);
        assert!((g[0] - 2.0 * 1.5 * (-0.125)).abs() < 1e-14);
        assert!((g[1] - 3.0 * 2.25 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn multiwell_expands() {
        let u = Potential::multiwell(&[-1.0, 1.0], 1.0, 0.0).unwrap();
        for x in [-1.7, -0.3, 0.0, 0.9, 1.8] {
            let expected = (x * x - 1.0) * (x * x - 1.0);
            assert!((u.value(&[x]) - expected).abs() < 1e-12);
        }
    }
}
