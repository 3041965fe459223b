//! Malliavin-type calculus on Poisson configuration spaces, with Monte Carlo
//! verifiers for its identities and isoperimetric inequalities.

pub mod calculus;
pub mod clark;
pub mod configuration;
pub mod error;
pub mod estimate;
pub mod estimators;
pub mod events;
pub mod kernels;
pub mod poisson_law;
pub mod space;
pub mod suite;

pub use error::{Error, Result};
