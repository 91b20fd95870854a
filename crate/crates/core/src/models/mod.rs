//! Coefficient laws for random polynomials and the reference random variables
//! they are compared against.

mod coefficients;
pub mod reference;

pub use coefficients::{sample_uniform_monic, CoefficientDistribution};
