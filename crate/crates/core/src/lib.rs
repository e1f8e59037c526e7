//! Simulation and inference for the stopped clock model: a stationary
//! sequence whose failed records are replaced by the last available one.
//!
//! - [`processes`]: seeded generators for Fréchet, ARMAX and window-rule
//!   indicator sequences.
//! - [`clock`]: construction of `Y` from `(X, U)`.
//! - [`patterns`]: exact indicator pattern probabilities by enumeration.
//! - [`estimators`]: empirical estimators computed from `Y`.
//! - [`theory`]: closed-form extremal index and tail dependence of `Y`.
//! - [`harness`]: Monte Carlo studies and file formats.

pub mod clock;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod patterns;
pub mod processes;
pub mod theory;

pub use error::{Error, Result};
