//! Metastable hierarchy extraction for gradient diffusions in Morse potentials.
//!
//! The crate is `no_std` (with `alloc`). It covers critical-point analysis of
//! potentials, landscape graphs with communication heights and gate saddles,
//! finite Markov chain reductions, the recursive tree of time scales, the
//! Gamma-expansion rate functionals, Gibbs quadrature with explicit test
//! densities, and an Euler-Maruyama simulator.

#![no_std]

extern crate alloc;

pub mod chain;
pub mod dirichlet;
pub mod gamma;
pub mod grid;
pub mod height;
pub mod landscape;
pub mod linalg;
pub mod sde;
pub mod synthetic;
pub mod tree;

pub use height::Height;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
