//! Three routes to the hypersingular operator: direct integration by parts,
//! congruence of the DP1 assembly, and the single-layer representation built
//! with the operator algebra.

use faer::Mat;

use super::engine::OperatorKind;
use super::kernel::Kernel;
use super::sparse_ops::{assemble_curl_component, assemble_normal_component, p1_to_dp1};
use crate::algebra::{BoundaryOperator, DiscreteOperator};
use crate::c64;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureOrders;
use crate::space::{FunctionSpace, SpaceKind};

/// The discontinuous space carrying the internal single layer: DP1, or P0
/// for Laplace where the curls are elementwise constant anyway.
pub fn intermediate_space(kernel: Kernel, mesh: &std::sync::Arc<crate::mesh::SurfaceMesh>) -> FunctionSpace {
    if kernel.is_laplace() {
        FunctionSpace::new(SpaceKind::P0, mesh)
    } else {
        FunctionSpace::new(SpaceKind::DP1, mesh)
    }
}

/// `W = sum_l C^l ⊙_D (V ⊙ C^l) - k^2 sum_l N^l ⊙_D (V ⊙ N^l)`, with range the
/// intermediate discontinuous space.
pub fn hypersingular_via_single_layer(
    kernel: Kernel,
    domain: &FunctionSpace,
    dual: &FunctionSpace,
    orders: QuadratureOrders,
) -> Result<BoundaryOperator> {
    for s in [domain, dual] {
        if !matches!(s.kind(), SpaceKind::P1 | SpaceKind::BP1) {
            return Err(Error::UnsupportedSpace(format!(
                "single-layer representation needs continuous linear spaces, got {}",
                s.kind()
            )));
        }
    }
    let disc = intermediate_space(kernel, domain.mesh());
    let v = BoundaryOperator::elementary(OperatorKind::SingleLayer, kernel, &disc, &disc, &disc, orders)?;
    let component = |l: usize, space: &FunctionSpace, normal: bool| -> Result<BoundaryOperator> {
        let m = if normal {
            assemble_normal_component(l, space, &disc)?
        } else {
            assemble_curl_component(l, space, &disc)?
        };
        let label = format!("{}{}", if normal { "N" } else { "C" }, l + 1);
        BoundaryOperator::from_weak_form(space, &disc, &disc, &label, DiscreteOperator::sparse(m))
    };
    let mut total: Option<BoundaryOperator> = None;
    let mut push = |term: BoundaryOperator| -> Result<()> {
        total = Some(match total.take() {
            None => term,
            Some(t) => t.sum(&term)?,
        });
        Ok(())
    };
    for l in 0..3 {
        let right = component(l, domain, false)?;
        let left = component(l, dual, false)?;
        push(left.dual_product(&v.product(&right)?)?)?;
    }
    let k = kernel.wavenumber();
    if k != 0.0 {
        for l in 0..3 {
            let right = component(l, domain, true)?;
            let left = component(l, dual, true)?;
            push(left.dual_product(&v.product(&right)?)?.scale(c64::new(-k * k, 0.0)))?;
        }
    }
    Ok(total.expect("at least one term"))
}

/// `P^T W_DP1 P` with `P` the P1 -> DP1 duplication map.
pub fn hypersingular_by_projection(kernel: Kernel, p1: &FunctionSpace, orders: QuadratureOrders) -> Result<Mat<c64>> {
    if p1.kind() != SpaceKind::P1 {
        return Err(Error::UnsupportedSpace(format!("projection assembly maps from P1, got {}", p1.kind())));
    }
    let dp1 = FunctionSpace::new(SpaceKind::DP1, p1.mesh());
    let w = BoundaryOperator::elementary(OperatorKind::Hypersingular, kernel, &dp1, &dp1, &dp1, orders)?;
    let p = DiscreteOperator::sparse(p1_to_dp1(p1, &dp1)?);
    Ok(p.adjoint().product(&w.weak_form()?.product(&p)?)?.to_dense())
}
