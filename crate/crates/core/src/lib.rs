//! Certification of bosonic code states (cat and GKP families, CV cluster and IQP
//! resource states) from simulated Gaussian measurements.
//!
//! The crate is layered bottom-up:
//! - [`fock`]: truncated Fock-space states, operators, spectra and quadrature densities.
//! - [`states`]: constructors for every target state plus a pure-loss channel.
//! - [`witness`]: symbolic witness polynomials, ordering rewrites, measurement decompositions.
//! - [`measurement`]: seeded homodyne, heterodyne and parity sampling.
//! - [`certifier`]: importance-sampling estimates, Hoeffding confidence and verdicts.

pub mod error;
pub mod fock;
pub mod states;
pub mod measurement;
pub mod witness;
pub mod certifier;

pub use error::{Error, Result};
