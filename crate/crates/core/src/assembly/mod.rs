//! Galerkin assembly of boundary operators, sparse pairings and potentials.

mod engine;
mod hypersingular;
mod kernel;
mod potential;
mod sparse_ops;

pub use engine::{assemble_dense, OperatorKind, Request};
pub use hypersingular::{hypersingular_by_projection, hypersingular_via_single_layer, intermediate_space};
pub use kernel::Kernel;
pub use potential::{check_proximity, potential_double_layer, potential_single_layer, PotentialOptions};
pub use sparse_ops::{
    assemble_curl_component, assemble_mass, assemble_normal_component, p1_to_dp1, project_function, project_function_with_normal,
};
