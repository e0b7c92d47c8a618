//! Homology of nodal domains of random periodic fields: sampling, cubical
//! approximation, Betti numbers, sign-pattern certification, probability
//! bounds and Gaussian orthant machinery.

pub mod admissibility;
pub mod bounds;
pub mod cubical;
pub mod error;
pub mod experiments;
pub mod homology;
pub mod orthant;
pub mod random_fields;
pub mod rng;

pub use error::{Error, Result};
