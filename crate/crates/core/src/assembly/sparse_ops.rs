//! Sparse Galerkin matrices: mass, surface-curl and normal-component
//! pairings, and the P1 -> DP1 duplication map.

use crate::algebra::CsrMatrix;
use crate::c64;
use crate::error::{Error, Result};
use crate::space::{combine, common_grid, hat_curls, FunctionSpace, SpaceKind};

fn local_mass(area: f64, f: [f64; 3], h: [f64; 3]) -> f64 {
    let (sf, sh) = (f.iter().sum::<f64>(), h.iter().sum::<f64>());
    area / 12.0 * (f[0] * h[0] + f[1] * h[1] + f[2] * h[2] + sf * sh)
}

/// Generic element loop: `local(element, f, h)` gives the integral for one
/// test/trial pair of local functions.
fn assemble(
    domain: &FunctionSpace,
    dual: &FunctionSpace,
    local: impl Fn(&crate::mesh::SurfaceMesh, usize, [f64; 3], [f64; 3]) -> f64,
) -> Result<CsrMatrix> {
    let grid = common_grid(domain, dual)?;
    let gm = domain.grid_mesh(grid);
    let mesh = gm.mesh();
    let (test, trial) = (dual.table(grid)?, domain.table(grid)?);
    let mut triplets = Vec::new();
    for e in 0..mesh.element_count() {
        for (i, f) in test.element(e) {
            for (j, h) in trial.element(e) {
                let v = local(mesh, e, f, h);
                if v != 0.0 {
                    triplets.push((i, j, c64::new(v, 0.0)));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dual.global_dof_count(), domain.global_dof_count(), triplets))
}

/// `[M]_{ij} = <phi_j, psi_i>` with `phi` from `domain` and `psi` from `dual`.
pub fn assemble_mass(domain: &FunctionSpace, dual: &FunctionSpace) -> Result<CsrMatrix> {
    assemble(domain, dual, |mesh, e, f, h| local_mass(mesh.area(e), f, h))
}

fn check_component(l: usize, domain: &FunctionSpace, dual: &FunctionSpace, curl: bool) -> Result<()> {
    if l > 2 {
        return Err(Error::InvalidArgument(format!("component index {l} not in 0..3")));
    }
    if curl && !matches!(domain.kind(), SpaceKind::P1 | SpaceKind::BP1 | SpaceKind::DP1) {
        return Err(Error::UnsupportedSpace(format!("surface curl of {} functions", domain.kind())));
    }
    if !matches!(dual.kind(), SpaceKind::DP1 | SpaceKind::P0) {
        return Err(Error::UnsupportedSpace(format!(
            "component operators test against DP1 or P0, got {}",
            dual.kind()
        )));
    }
    Ok(())
}

/// `[C^l]_{ij} = <[curl theta_j]_l, xi_i>`.
pub fn assemble_curl_component(l: usize, domain: &FunctionSpace, dual: &FunctionSpace) -> Result<CsrMatrix> {
    check_component(l, domain, dual, true)?;
    assemble(domain, dual, |mesh, e, f, h| {
        let curl = combine(&hat_curls(mesh, e), h);
        curl[l] * mesh.area(e) / 3.0 * (f[0] + f[1] + f[2])
    })
}

/// `[N^l]_{ij} = <theta_j nu_l, xi_i>`.
pub fn assemble_normal_component(l: usize, domain: &FunctionSpace, dual: &FunctionSpace) -> Result<CsrMatrix> {
    check_component(l, domain, dual, false)?;
    assemble(domain, dual, |mesh, e, f, h| mesh.normal(e)[l] * local_mass(mesh.area(e), f, h))
}

/// The embedding of P1 into DP1: one unit entry per row.
pub fn p1_to_dp1(p1: &FunctionSpace, dp1: &FunctionSpace) -> Result<CsrMatrix> {
    if p1.kind() != SpaceKind::P1 || dp1.kind() != SpaceKind::DP1 || !p1.same_mesh(dp1) {
        return Err(Error::SpaceMismatch(format!(
            "duplication map needs P1 and DP1 on one mesh, got {} and {}",
            p1.kind(),
            dp1.kind()
        )));
    }
    let mesh = p1.mesh();
    let triplets = mesh
        .triangles()
        .iter()
        .enumerate()
        .flat_map(|(e, t)| (0..3).map(move |k| (3 * e + k, t[k], c64::new(1.0, 0.0))))
        .collect();
    Ok(CsrMatrix::from_triplets(dp1.global_dof_count(), p1.global_dof_count(), triplets))
}

/// `<f, psi_i>` for every basis function of `dual`, by a degree-6 rule on
/// each element of the dual space's own grid.
pub fn project_function(dual: &FunctionSpace, f: &dyn Fn(crate::mesh::Point) -> c64) -> Result<Vec<c64>> {
    project_function_with_normal(dual, &|x, _| f(x))
}

/// As [`project_function`] for integrands that also depend on the outward
/// unit normal.
pub fn project_function_with_normal(dual: &FunctionSpace, f: &dyn Fn(crate::mesh::Point, crate::mesh::Point) -> c64) -> Result<Vec<c64>> {
    let rule = crate::quadrature::gauss_triangle(6)?;
    let lambda = rule.barycentric();
    let grid = dual.native_grid();
    let gm = dual.grid_mesh(grid);
    let mesh = gm.mesh();
    let table = dual.table(grid)?;
    let mut out = vec![c64::new(0.0, 0.0); dual.global_dof_count()];
    for e in 0..mesh.element_count() {
        let jac = 2.0 * mesh.area(e);
        let nu = mesh.normal(e);
        let values: Vec<c64> = lambda.iter().map(|l| f(mesh.point(e, *l), nu)).collect();
        for (i, v) in table.element(e) {
            for ((l, w), fx) in lambda.iter().zip(&rule.weights).zip(&values) {
                out[i] += fx * (w * jac * (v[0] * l[0] + v[1] * l[1] + v[2] * l[2]));
            }
        }
    }
    Ok(out)
}
