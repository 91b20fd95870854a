//! Statistics of irreducible factors of random polynomials over finite
//! fields: field and polynomial arithmetic, coefficient models, exact small
//! oracles, a truncated generating-function engine and order diagnostics.

pub mod error;
pub mod field;
pub mod models;
pub mod moments;
pub mod ntheory;
pub mod oracles;
pub mod order;
pub mod pmf;
pub mod poly;
pub mod rng;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElement, FieldRecord};
pub use poly::{Factorization, Polynomial};
