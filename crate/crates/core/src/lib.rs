//! Global minimization of the largest eigenvalue of one-parameter Hermitian families,
//! with applications to the inner numerical radius, Crawford number and definite pairs.

pub mod definiteness;
pub mod error;
pub mod gallery;
pub mod levelset;
pub mod linalg;
pub mod param;
pub mod rate;
pub mod subspace;
pub mod support;

pub use error::{Error, Result};
