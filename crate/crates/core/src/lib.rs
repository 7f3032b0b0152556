//! Galerkin boundary element operators with a product algebra over
//! (domain, range, dual-to-range) space triples.

pub mod algebra;
pub mod assembly;
pub mod calderon;
pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod space;

pub use error::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex<f64>;
