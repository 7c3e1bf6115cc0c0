//! Simulation and exact moment computations for Gaussian beta ensembles in
//! tridiagonal form.
//!
//! The crate covers sampling of the tridiagonal model and its `J_alpha` truncation,
//! a QL eigensolver, path enumeration, an exact rational engine for moments and
//! variances in the parameters `u = 1/(n beta)` and `beta`, limiting densities, and a
//! Monte Carlo experiment harness.

pub mod densities;
pub mod eig;
pub mod error;
pub mod exact;
pub mod harness;
pub mod model;
pub mod paths;
pub mod randsrc;

pub use error::{Error, Result};
