//! Euler-Maruyama simulation of `dx = −∇U(x)dt + √(2ε)dw` as a Monte Carlo
//! cross-check of the hierarchy's predictions.

mod histogram;
mod transitions;
mod valley;

pub use histogram::{empirical_histogram, gibbs_bin_masses, HistogramBins};
pub use transitions::{exit_replica, summarize_exits, transition_stats, ReplicaExit, TransitionStats};
pub use valley::{default_valley_depth, Valley, ValleyMap};

use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::chain::ChainError;
use crate::grid::GridError;
use crate::landscape::Potential;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdeError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("valley of minimum {minimum} holds {count} critical points")]
    ValleyOverlap { minimum: String, count: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Parameters of a batch of independent replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Keep every `thin`-th step of a recorded path.
    pub thin: usize,
    /// Depth `r₀` of the valleys used for exit detection; `None` selects
    /// [`default_valley_depth`].
    pub valley_depth: Option<f64>,
}

impl SimConfig {
    /// Validates the step against `dt ≤ 0.01` and, for `ε > 0`,
    /// `dt ≤ ε/10`.
    pub fn new(eps: f64, dt: f64, horizon: f64, replicas: usize, seed: u64) -> Result<Self, SdeError> {
        let config = Self { eps, dt, horizon, replicas, seed, thin: 1, valley_depth: None };
        config.validate()?;
        Ok(config)
    }

    pub fn with_thin(mut self, thin: usize) -> Result<Self, SdeError> {
        self.thin = thin;
        self.validate()?;
        Ok(self)
    }

    pub fn with_valley_depth(mut self, depth: f64) -> Result<Self, SdeError> {
        self.valley_depth = Some(depth);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        let bad = |msg: String| Err(SdeError::InvalidConfig(msg));
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(alloc::format!("temperature must be finite and nonnegative, got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return bad(alloc::format!("time step must lie in (0, 0.01], got {}", self.dt));
        }
        if self.eps > 0.0 && self.dt > self.eps / 10.0 {
            return bad(alloc::format!("time step {} exceeds eps/10 = {}", self.dt, self.eps / 10.0));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(alloc::format!("horizon must be positive, got {}", self.horizon));
        }
        if self.replicas == 0 {
            return bad("at least one replica is required".into());
        }
        if self.thin == 0 {
            return bad("thinning factor must be at least 1".into());
        }
        if let Some(r) = self.valley_depth {
            if !(r > 0.0 && r.is_finite()) {
                return bad(alloc::format!("valley depth must be positive, got {r}"));
            }
        }
        Ok(())
    }

    /// Number of steps needed to reach the horizon.
    pub fn steps(&self) -> usize {
        libm::ceil(self.horizon / self.dt) as usize
    }
}

/// The generator of replica `replica`: a ChaCha stream keyed by the master
/// seed, so replicas are independent of execution order.
pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// One Euler-Maruyama stepper with its own noise stream.
pub(crate) struct Stepper<'a> {
    potential: &'a Potential,
    dt: f64,
    noise: f64,
    rng: ChaCha8Rng,
    grad: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(potential: &'a Potential, config: &SimConfig, replica: usize) -> Self {
        Self {
            potential,
            dt: config.dt,
            noise: libm::sqrt(2.0 * config.eps * config.dt),
            rng: replica_rng(config.seed, replica),
            grad: alloc::vec![0.0; potential.dim()],
        }
    }

    /// Advances `x` by one step; returns `false` once `x` leaves the box.
    pub(crate) fn step(&mut self, x: &mut [f64]) -> bool {
        self.potential.gradient_into(x, &mut self.grad);
        for (xi, gi) in x.iter_mut().zip(&self.grad) {
            let xi_noise: f64 = if self.noise > 0.0 { self.rng.sample(StandardNormal) } else { 0.0 };
            *xi += -gi * self.dt + self.noise * xi_noise;
        }
        self.potential.bounds().contains(x)
    }
}

/// A thinned trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub replica: usize,
    /// Time between consecutive samples.
    pub sample_dt: f64,
    /// Samples at times `0, sample_dt, 2·sample_dt, …`.
    pub samples: Vec<Vec<f64>>,
    /// Time at which the path left the box, ending the replica.
    pub left_box_at: Option<f64>,
}

impl SamplePath {
    /// Samples from time `burn_in` on.
    pub fn after(&self, burn_in: f64) -> &[Vec<f64>] {
        let skip = (libm::ceil(burn_in / self.sample_dt) as usize).min(self.samples.len());
        &self.samples[skip..]
    }
}

/// Simulates replica `replica` from `x0` up to the configured horizon.
pub fn simulate_path(
    potential: &Potential,
    config: &SimConfig,
    x0: &[f64],
    replica: usize,
) -> Result<SamplePath, SdeError> {
    config.validate()?;
    if x0.len() != potential.dim() || !potential.bounds().contains(x0) {
        return Err(SdeError::InvalidInput(alloc::format!("start {x0:?} is not inside the box")));
    }
    let mut stepper = Stepper::new(potential, config, replica);
    let mut x = x0.to_vec();
    let steps = config.steps();
    let mut samples = Vec::with_capacity(steps / config.thin + 1);
    samples.push(x.clone());
    let mut left_box_at = None;
    for k in 1..=steps {
        if !stepper.step(&mut x) {
            left_box_at = Some(k as f64 * config.dt);
            break;
        }
        if k % config.thin == 0 {
            samples.push(x.clone());
        }
    }
    Ok(SamplePath { replica, sample_dt: config.dt * config.thin as f64, samples, left_box_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::Potential;

    #[test]
    fn config_enforces_step_heuristics() {
        assert!(SimConfig::new(0.1, 0.01, 1.0, 1, 0).is_ok());
        assert!(SimConfig::new(0.05, 0.01, 1.0, 1, 0).is_err());
        assert!(SimConfig::new(0.5, 0.02, 1.0, 1, 0).is_err());
        assert!(SimConfig::new(0.1, 0.01, 1.0, 0, 0).is_err());
        assert!(SimConfig::new(0.0, 0.01, 1.0, 1, 0).is_ok());
        assert!(SimConfig::new(0.1, 0.01, 1.0, 1, 0).unwrap().with_thin(0).is_err());
    }

    #[test]
    fn zero_temperature_descends_to_the_basin_minimum() {
        let u = Potential::double_well();
        let config = SimConfig::new(0.0, 0.01, 20.0, 1, 7).unwrap();
        for (x0, m) in [(0.3, 1.0), (-0.2, -1.0), (1.8, 1.0)] {
            let path = simulate_path(&u, &config, &[x0], 0).unwrap();
            let end = path.samples.last().unwrap()[0];
            assert!((end - m).abs() < 1e-8, "{x0} -> {end}");
        }
    }

    #[test]
    fn identical_inputs_give_identical_paths() {
        let u = Potential::double_well();
        let config = SimConfig::new(0.2, 0.01, 5.0, 4, 11).unwrap().with_thin(5).unwrap();
        let a = simulate_path(&u, &config, &[1.0], 3).unwrap();
        let b = simulate_path(&u, &config, &[1.0], 3).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&u, &config, &[1.0], 2).unwrap();
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.samples.len(), 101);
    }

    #[test]
    fn ornstein_uhlenbeck_variance() {
        // For U = x² the stationary law is N(0, ε/2); the scheme inflates
        // it by 1/(1 − dt).
        let u = Potential::quadratic(1, 5.0).unwrap();
        let eps = 0.2;
        let config = SimConfig::new(eps, 0.005, 4000.0, 1, 3).unwrap().with_thin(10).unwrap();
        let path = simulate_path(&u, &config, &[0.0], 0).unwrap();
        let xs = path.after(10.0);
        let n = xs.len() as f64;
        let mean = xs.iter().map(|x| x[0]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[0] - mean) * (x[0] - mean)).sum::<f64>() / n;
        assert!((var - eps / 2.0).abs() <= 0.05 * eps / 2.0, "{var}");
    }

    #[test]
    fn leaving_the_box_ends_the_path() {
        let u = Potential::quadratic(1, 0.5).unwrap();
        let config = SimConfig::new(5.0, 0.01, 100.0, 1, 1).unwrap();
        let path = simulate_path(&u, &config, &[0.0], 0).unwrap();
        assert!(path.left_box_at.is_some());
        assert!(path.samples.len() < config.steps());
    }
}
