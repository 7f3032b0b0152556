//! Triangle and element-pair quadrature.

mod gauss;
mod pair;
mod triangle;

pub use gauss::gauss_legendre_unit;
pub use pair::{singular_pair_rule, PairClass, PairRule, MAX_SINGULAR_ORDER};
pub use triangle::{gauss_triangle, TriangleRule, MAX_TRIANGLE_ORDER};

use crate::mesh::SurfaceMesh;

/// Default degree of the tensor rule for disjoint element pairs.
pub const DEFAULT_REGULAR_ORDER: usize = 4;
/// Default number of Gauss points per dimension for singular pairs.
pub const DEFAULT_SINGULAR_ORDER: usize = 4;

/// Classify two elements of the same mesh by their number of shared vertices.
pub fn classify_pair(mesh: &SurfaceMesh, a: usize, b: usize) -> PairClass {
    let ta = mesh.triangles()[a];
    let tb = mesh.triangles()[b];
    let shared = ta.iter().filter(|v| tb.contains(v)).count();
    PairClass::from_shared_count(shared)
}

/// Quadrature orders used for element-pair integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureOrders {
    pub regular: usize,
    pub singular: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        Self {
            regular: DEFAULT_REGULAR_ORDER,
            singular: DEFAULT_SINGULAR_ORDER,
        }
    }
}
