//! Donsker-Varadhan level-two rate `sup_{u>0} Σ_x −ω(x)(Lu)(x)/u(x)`.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::classes::class_stationary;
use super::{communicating_classes, detailed_balance_residual, ChainError, Ctmc, StateMeasure};

/// Detailed-balance residual below which a class counts as reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

const GRADIENT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

/// How to evaluate the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DvMethod {
    /// Split over communicating classes; closed form on reversible classes.
    #[default]
    Decomposed,
    /// Direct numerical maximization over `u`.
    Sup,
}

fn check_measure(chain: &Ctmc, omega: &StateMeasure) -> Result<(), ChainError> {
    if omega.len() != chain.len() {
        return Err(ChainError::Shape { expected: chain.len(), got: omega.len() });
    }
    if !omega.is_probability() {
        return Err(ChainError::InvalidMeasure("rate requires a probability measure".into()));
    }
    Ok(())
}

pub fn dv_rate(chain: &Ctmc, omega: &StateMeasure, method: DvMethod) -> Result<f64, ChainError> {
    check_measure(chain, omega)?;
    match method {
        DvMethod::Sup => Ok(dv_rate_sup(chain, omega.weights())),
        DvMethod::Decomposed => decomposed(chain, omega.weights()),
    }
}

fn decomposed(chain: &Ctmc, w: &[f64]) -> Result<f64, ChainError> {
    let mut total = 0.0;
    for class in communicating_classes(chain).classes {
        let mass: f64 = class.states.iter().map(|&x| w[x]).sum();
        if mass <= 0.0 {
            continue;
        }
        let local: Vec<f64> = class.states.iter().map(|&x| w[x] / mass).collect();
        let leaving: f64 =
            class.states.iter().zip(&local).map(|(&x, p)| p * chain.out_rate_avoiding(x, &class.states)).sum();
        let inner = if class.states.len() == 1 {
            0.0
        } else {
            let reflected = chain.reflected(&class.states)?;
            let all: Vec<usize> = (0..reflected.len()).collect();
            let nu = class_stationary(&reflected, &all)?;
            if detailed_balance_residual(&reflected, &nu) < REVERSIBILITY_TOL {
                reversible_closed_form(&reflected, &nu, &local)
            } else {
                log::warn!("class {:?} is not reversible; using the numerical supremum", class.states);
                dv_rate_sup(&reflected, &local)
            }
        };
        total += mass * (inner + leaving);
    }
    Ok(total)
}

/// `½ Σ_{x,y} ν(x) r(x,y) (f(y) − f(x))²` with `f = √(ω/ν)`.
fn reversible_closed_form(chain: &Ctmc, nu: &[f64], omega: &[f64]) -> f64 {
    let f: Vec<f64> = omega.iter().zip(nu).map(|(w, n)| libm::sqrt(w / n)).collect();
    let n = chain.len();
    let mut acc = 0.0;
    for x in 0..n {
        for y in 0..n {
            let d = f[y] - f[x];
            acc += nu[x] * chain.rate(x, y) * d * d;
        }
    }
    0.5 * acc
}

/// Numerical supremum over `u > 0`.
///
/// Components of `u` off the support of `ω` are sent to zero, which removes
/// their inflow terms; the remaining concave problem splits over the
/// communicating classes of the chain reflected on the support and is solved
/// by damped Newton in `v = log u` with one component pinned.
pub fn dv_rate_sup(chain: &Ctmc, omega: &[f64]) -> f64 {
    let support: Vec<usize> = (0..chain.len()).filter(|&x| omega[x] > 0.0).collect();
    let escape: f64 = support.iter().map(|&x| omega[x] * chain.out_rate(x)).sum();
    let Ok(on_support) = chain.reflected(&support) else {
        return escape;
    };
    let mut retained = 0.0;
    for class in communicating_classes(&on_support).classes {
        if class.states.len() < 2 {
            continue;
        }
        let m = class.states.len();
        let mut coef = DMatrix::zeros(m, m);
        for (i, &a) in class.states.iter().enumerate() {
            for (j, &b) in class.states.iter().enumerate() {
                coef[(i, j)] = omega[support[a]] * on_support.rate(a, b);
            }
        }
        retained += min_exponential_sum(&coef);
    }
    (escape - retained).max(0.0)
}

fn exponential_sum(coef: &DMatrix<f64>, v: &[f64]) -> f64 {
    let m = v.len();
    let mut s = 0.0;
    for x in 0..m {
        for y in 0..m {
            if coef[(x, y)] > 0.0 {
                s += coef[(x, y)] * libm::exp(v[y] - v[x]);
            }
        }
    }
    s
}

/// `min_v Σ_{x,y} c(x,y) e^{v_y − v_x}` over `v` with `v_0 = 0`, for a
/// strongly connected coefficient pattern.
fn min_exponential_sum(coef: &DMatrix<f64>) -> f64 {
    let m = coef.nrows();
    let mut v = vec![0.0; m];
    let mut value = exponential_sum(coef, &v);
    for _ in 0..MAX_ITERATIONS {
        let mut grad = vec![0.0; m];
        let mut hess = DMatrix::zeros(m, m);
        for x in 0..m {
            for y in 0..m {
                let c = coef[(x, y)];
                if c <= 0.0 {
                    continue;
                }
                let a = c * libm::exp(v[y] - v[x]);
                grad[y] += a;
                grad[x] -= a;
                hess[(x, x)] += a;
                hess[(y, y)] += a;
                hess[(x, y)] -= a;
                hess[(y, x)] -= a;
            }
        }
        let gnorm = grad[1..].iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if gnorm < GRADIENT_TOL * value.max(1.0) {
            break;
        }
        let reduced_h = hess.view((1, 1), (m - 1, m - 1)).into_owned();
        let reduced_g = DVector::from_iterator(m - 1, grad[1..].iter().map(|g| -g));
        let step = reduced_h
            .clone()
            .cholesky()
            .map(|c| c.solve(&reduced_g))
            .or_else(|| reduced_h.lu().solve(&reduced_g))
            .unwrap_or(reduced_g);
        let slope: f64 = -step.iter().zip(&grad[1..]).map(|(s, g)| -s * g).sum::<f64>();
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-20 {
            let trial: Vec<f64> =
                core::iter::once(0.0).chain(v[1..].iter().zip(step.iter()).map(|(vi, si)| vi + t * si)).collect();
            let tv = exponential_sum(coef, &trial);
            if tv <= value + 1e-4 * t * slope {
                v = trial;
                value = tv;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    value
}
