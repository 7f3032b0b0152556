//! Operator product algebra: discrete operators, boundary operators with
//! (domain, range, dual-to-range) triples, grid functions and blocked systems.

mod blocked;
mod discrete;
mod grid_function;
mod mass;
mod operator;
mod sparse;

pub use blocked::{apply_blocked, split, BlockedOperator};
pub use discrete::DiscreteOperator;
pub use grid_function::{apply, GridFunction};
pub use mass::{mass_factor, mass_matrix, MassFactor};
pub use operator::BoundaryOperator;
pub use sparse::CsrMatrix;
