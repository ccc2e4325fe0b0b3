//! Time-domain boundary integral equations for the 2D wave equation.
//!
//! The crate solves exterior Dirichlet and transmission scattering problems
//! by collocation marching-on-in-time, and predicts the stability of each
//! formulation from the characteristic roots of the time-discretised scheme.

pub mod charfun;
pub mod error;
pub mod geometry;
pub mod marching;
pub mod reference;
pub mod specfun;
pub mod ssm;
pub mod tdkernels;

pub use error::{Error, Result};
