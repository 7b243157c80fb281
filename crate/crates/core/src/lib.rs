//! Discrete-spacetime Dirac schemes on periodic lattices.
//!
//! The crate implements the naive symmetric-difference discretization of the
//! Dirac equation together with the (1+1)D and (3+1)D Dirac quantum walks and
//! their flavor-staggered variants, and the analysis machinery around them:
//!
//! - [`lattice`]: direct/reciprocal lattice construction, Bragg-equation
//!   Brillouin-zone geometry, sublattice flavor partitions;
//! - [`schemes`]: update stencils, unitarity and Hermiticity diagnostics;
//! - [`fourier`]: matrix-valued symbols, closed-form determinants, continuum
//!   Taylor checks;
//! - [`doublers`]: half-period shift scans and the flavored no-doubling gap;
//! - [`greens`]: lattice Green functions by discrete mode inversion;
//! - [`evolve`]: direct-space state evolution and continuum convergence;
//! - [`symmetry`]: chiral projectors, commutators, the gauged neutrino run;
//! - [`covering`]: the two- and eight-sheet covering maps of the zone torus.
//!
//! Heavy sweeps run in parallel via rayon when the `parallel` feature
//! (default) is enabled; [`exec`] holds the sequential fallbacks.

pub mod covering;
pub mod doublers;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod fourier;
pub mod greens;
pub mod lattice;
pub mod linalg;
pub mod schemes;
pub mod symmetry;
pub mod verify;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

pub use num_complex::Complex64;
