//! Simulation toolkit for redundant records of pointer states in fragmented
//! environments, and for probabilities derived from envariance.
//!
//! Modules, bottom up:
//!
//! - [`state`]: dense statevectors and density operators, the exact oracle.
//! - [`entropy`]: von Neumann and Shannon entropies, in bits.
//! - [`branch`]: branch states, the Ising spin bath and the predictability sieve.
//! - [`info`]: mutual information, partial-information plots, redundancy and
//!   the observable-resolved redundancy ridge.
//! - [`envariance`]: the repeatability constraint, Schmidt forms, envariance
//!   and Born's rule by finegraining.
//! - [`qbm`]: closed-form reference curves for quantum Brownian motion.
//! - [`experiment`]: configuration, validation and seeded runs emitting CSV/JSON.

pub mod branch;
pub mod entropy;
pub mod envariance;
pub mod error;
pub mod experiment;
pub mod info;
pub mod qbm;
pub mod seed;
pub mod state;

pub use error::{Error, Result};

/// Complex double.
pub type C64 = nalgebra::Complex<f64>;
