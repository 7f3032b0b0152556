//! Multitrace operators, Calderón projectors and the transmission setup.

use std::sync::Arc;

use crate::algebra::{BlockedOperator, BoundaryOperator};
use crate::assembly::{Kernel, OperatorKind};
use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;
use crate::quadrature::QuadratureOrders;
use crate::space::{FunctionSpace, SpaceKind};

/// How the Dirichlet and Neumann traces are discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// BP1 Dirichlet and DUAL0 Neumann traces, each tested against the other:
    /// every pairing mass is square and stable.
    Dual,
    /// P1 for everything; adequate on smooth surfaces.
    P1,
}

impl Recipe {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dual" => Ok(Recipe::Dual),
            "p1" => Ok(Recipe::P1),
            _ => Err(Error::InvalidArgument(format!("unknown space recipe {s:?}; expected dual or p1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

/// Trace spaces and row dual spaces of a recipe.
#[derive(Debug, Clone)]
pub struct TraceSpaces {
    pub dirichlet: FunctionSpace,
    pub neumann: FunctionSpace,
    /// Dual space of the Dirichlet row.
    pub dirichlet_dual: FunctionSpace,
    /// Dual space of the Neumann row.
    pub neumann_dual: FunctionSpace,
}

impl TraceSpaces {
    pub fn new(mesh: &Arc<SurfaceMesh>, recipe: Recipe) -> Self {
        let s = |k| FunctionSpace::new(k, mesh);
        match recipe {
            Recipe::Dual => TraceSpaces {
                dirichlet: s(SpaceKind::BP1),
                neumann: s(SpaceKind::Dual0),
                dirichlet_dual: s(SpaceKind::Dual0),
                neumann_dual: s(SpaceKind::BP1),
            },
            Recipe::P1 => TraceSpaces {
                dirichlet: s(SpaceKind::P1),
                neumann: s(SpaceKind::P1),
                dirichlet_dual: s(SpaceKind::P1),
                neumann_dual: s(SpaceKind::P1),
            },
        }
    }
}

/// `A = [[-K, V], [W, K']]`.
pub fn multitrace_operator(mesh: &Arc<SurfaceMesh>, k: f64, recipe: Recipe) -> Result<BlockedOperator> {
    multitrace_with_orders(mesh, k, recipe, QuadratureOrders::default())
}

pub fn multitrace_with_orders(mesh: &Arc<SurfaceMesh>, k: f64, recipe: Recipe, orders: QuadratureOrders) -> Result<BlockedOperator> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("wavenumber must be finite and non-negative, got {k}")));
    }
    let kernel = Kernel::helmholtz(k);
    let t = TraceSpaces::new(mesh, recipe);
    let (d, n, dd, nd) = (&t.dirichlet, &t.neumann, &t.dirichlet_dual, &t.neumann_dual);
    let layer_ops = [
        (OperatorKind::DoubleLayer, d.clone(), d.clone(), dd.clone()),
        (OperatorKind::SingleLayer, n.clone(), d.clone(), dd.clone()),
        (OperatorKind::AdjointDoubleLayer, n.clone(), n.clone(), nd.clone()),
    ];
    let w_op = (OperatorKind::Hypersingular, d.clone(), n.clone(), nd.clone());
    // V, K and K' share a grid; W lives on the primal grid under the dual
    // recipe, so it joins the batch only when the grids agree.
    let (kk, v, kp, w) = match recipe {
        Recipe::P1 => {
            let mut all = BoundaryOperator::fused(kernel, &[layer_ops[0].clone(), layer_ops[1].clone(), layer_ops[2].clone(), w_op], orders)?;
            let w = all.pop().unwrap();
            let kp = all.pop().unwrap();
            let v = all.pop().unwrap();
            (all.pop().unwrap(), v, kp, w)
        }
        Recipe::Dual => {
            let mut all = BoundaryOperator::fused(kernel, &layer_ops, orders)?;
            let w = BoundaryOperator::fused(kernel, &[w_op], orders)?.remove(0);
            let kp = all.pop().unwrap();
            let v = all.pop().unwrap();
            (all.pop().unwrap(), v, kp, w)
        }
    };
    BlockedOperator::new(vec![vec![Some(kk.scale(-1.0)), Some(v)], vec![Some(w), Some(kp)]])
}

/// Blocked identity with the recipe's spaces; off-diagonal blocks are empty.
pub fn multitrace_identity(mesh: &Arc<SurfaceMesh>, recipe: Recipe) -> Result<BlockedOperator> {
    let t = TraceSpaces::new(mesh, recipe);
    BlockedOperator::new(vec![
        vec![Some(BoundaryOperator::identity(&t.dirichlet, &t.dirichlet, &t.dirichlet_dual)?), None],
        vec![None, Some(BoundaryOperator::identity(&t.neumann, &t.neumann, &t.neumann_dual)?)],
    ])
}

/// `C = ½Id + A` (interior) or `½Id - A` (exterior).
pub fn calderon_projector(mesh: &Arc<SurfaceMesh>, k: f64, side: Side, recipe: Recipe) -> Result<BlockedOperator> {
    let half = multitrace_identity(mesh, recipe)?.scale(0.5);
    let a = multitrace_operator(mesh, k, recipe)?;
    match side {
        Side::Interior => half.sum(&a),
        Side::Exterior => half.difference(&a),
    }
}

/// Multitrace operators at wavenumbers `n k` (inside) and `k` (outside),
/// with the blocked identity.
pub fn transmission_operators(
    mesh: &Arc<SurfaceMesh>,
    k: f64,
    n: f64,
    recipe: Recipe,
) -> Result<(BlockedOperator, BlockedOperator, BlockedOperator)> {
    if !(k > 0.0 && n > 0.0) {
        return Err(Error::InvalidArgument(format!("transmission needs k > 0 and n > 0, got k={k}, n={n}")));
    }
    Ok((
        multitrace_operator(mesh, n * k, recipe)?,
        multitrace_operator(mesh, k, recipe)?,
        multitrace_identity(mesh, recipe)?,
    ))
}
