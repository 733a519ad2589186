//! Weighted random connection models.
//!
//! Sampling of marked Poisson configurations, the discretised site-bond
//! lattice, ghost-field exploration forests, exact enumeration of tiny
//! instances and Monte Carlo estimators built on top of them.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod continuum;
pub mod dsu;
pub mod error;
pub mod estimators;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod osss;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
