//! Interior Dirichlet problem by the first-kind single-layer equation, solved
//! plainly and with the hypersingular operator as preconditioner.

use std::time::Instant;

use bemalg::algebra::{apply, mass_matrix, BoundaryOperator, DiscreteOperator, GridFunction};
use bemalg::assembly::{potential_double_layer, potential_single_layer, Kernel, OperatorKind};
use bemalg::calderon::{Recipe, TraceSpaces};
use bemalg::mesh::{Point, SurfaceMesh};
use bemalg::quadrature::QuadratureOrders;
use bemalg::solver::{gmres, GmresOptions, SolveReport};
use bemalg::{c64, Result};

use crate::{num, relative_difference, LabelledMesh, Report, RunConfig, Table};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Results for one mesh.
#[derive(Debug, Clone)]
pub struct DirichletRow {
    pub label: String,
    pub dirichlet_dofs: usize,
    pub neumann_dofs: usize,
    pub plain: SolveReport,
    pub preconditioned: SolveReport,
    /// `|x_plain - x_prec| / |x_prec|` over Neumann coefficients.
    pub coefficient_difference: f64,
    /// Relative L² error of the computed Neumann trace against the projected
    /// exact one.
    pub neumann_error: f64,
    /// Largest relative error of the representation formula at interior
    /// points.
    pub reconstruction_error: f64,
    pub assembly_time: f64,
}

pub struct DirichletOutcome {
    pub rows: Vec<DirichletRow>,
    pub report: Report,
}

fn centre_and_radius(mesh: &SurfaceMesh) -> (Point, f64) {
    let n = mesh.vertex_count() as f64;
    let c: Point = std::array::from_fn(|i| mesh.vertices().iter().map(|v| v[i]).sum::<f64>() / n);
    let r = mesh
        .vertices()
        .iter()
        .map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    (c, r)
}

fn offset(c: Point, r: f64, d: [f64; 3]) -> Point {
    std::array::from_fn(|i| c[i] + r * d[i])
}

/// Source point outside the surface and interior evaluation points.
pub fn manufactured_points(mesh: &SurfaceMesh) -> (Point, Vec<Point>) {
    let (c, r) = centre_and_radius(mesh);
    let source = offset(c, r, [1.2, 0.9, 0.6]);
    let inside = [[0.1, 0.2, -0.15], [-0.3, 0.15, 0.2], [0.2, -0.35, 0.1]]
        .into_iter()
        .map(|d| offset(c, r, d))
        .collect();
    (source, inside)
}

/// `V`, `K` and `W` with the recipe's spaces; `W` gains `m m^T` at `k = 0`
/// to remove its constant null space.
pub fn dirichlet_operators(
    mesh: &std::sync::Arc<SurfaceMesh>,
    k: f64,
    recipe: Recipe,
    orders: QuadratureOrders,
) -> Result<(TraceSpaces, BoundaryOperator, BoundaryOperator, BoundaryOperator)> {
    let kernel = Kernel::helmholtz(k);
    let t = TraceSpaces::new(mesh, recipe);
    let v_op = (OperatorKind::SingleLayer, t.neumann.clone(), t.dirichlet.clone(), t.dirichlet_dual.clone());
    let k_op = (OperatorKind::DoubleLayer, t.dirichlet.clone(), t.dirichlet.clone(), t.dirichlet_dual.clone());
    let w_op = (OperatorKind::Hypersingular, t.dirichlet.clone(), t.neumann.clone(), t.neumann_dual.clone());
    let (v, kk, w) = match recipe {
        Recipe::P1 => {
            let mut ops = BoundaryOperator::fused(kernel, &[v_op, k_op, w_op], orders)?;
            let w = ops.pop().unwrap();
            let kk = ops.pop().unwrap();
            (ops.pop().unwrap(), kk, w)
        }
        Recipe::Dual => {
            let mut ops = BoundaryOperator::fused(kernel, &[v_op, k_op], orders)?;
            let w = BoundaryOperator::fused(kernel, &[w_op], orders)?.remove(0);
            let kk = ops.pop().unwrap();
            (ops.pop().unwrap(), kk, w)
        }
    };
    let w = if kernel.is_laplace() {
        let (d, nd) = (t.dirichlet.clone(), t.neumann_dual.clone());
        let inner = w.clone();
        BoundaryOperator::from_provider(w.domain(), w.range(), w.dual_to_range(), "regularised hypersingular", move || {
            let m = mass_matrix(&d, &nd)?;
            let ones = |n| vec![c64::new(1.0, 0.0); n];
            let test_integrals = m.matvec(&ones(m.ncols()));
            let trial_integrals = m.matvec_adjoint(&ones(m.nrows()));
            inner.weak_form()?.sum(&DiscreteOperator::rank_one(test_integrals, trial_integrals))
        })?
    } else {
        w
    };
    Ok((t, v, kk, w))
}

fn solve_one(lm: &LabelledMesh, k: f64, recipe: Recipe, orders: QuadratureOrders, tol: f64) -> Result<DirichletRow> {
    let mesh = &lm.mesh;
    let kernel = Kernel::helmholtz(k);
    let (source, inside) = manufactured_points(mesh);
    let u = move |x: Point| kernel.value(x, source);
    let du = move |x: Point, nu: Point| {
        let d: Point = std::array::from_fn(|i| x[i] - source[i]);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        kernel.radial_at(r) * (d[0] * nu[0] + d[1] * nu[1] + d[2] * nu[2])
    };

    let start = Instant::now();
    let (t, v, kk, w) = dirichlet_operators(mesh, k, recipe, orders)?;
    let id = BoundaryOperator::identity(&t.dirichlet, &t.dirichlet, &t.dirichlet_dual)?;
    let rhs_op = id.scale(0.5).sum(&kk)?;
    let lhs_prec = w.product(&v)?;
    let rhs_prec = w.product(&rhs_op)?;
    v.weak_form()?;
    rhs_op.weak_form()?;
    lhs_prec.weak_form()?;
    rhs_prec.weak_form()?;
    let assembly_time = start.elapsed().as_secs_f64();

    let g = GridFunction::project(&t.dirichlet, &t.dirichlet_dual, u)?;
    let opts = GmresOptions { tol, ..Default::default() };
    let (x_plain, plain) = gmres(&v, &apply(&rhs_op, &g)?, opts)?;
    let (x_prec, preconditioned) = gmres(&lhs_prec, &apply(&rhs_prec, &g)?, opts)?;
    let (cp, cq) = (x_plain.coefficients()?, x_prec.coefficients()?);
    let coefficient_difference = relative_difference(&cp, &cq);

    let exact = GridFunction::project_with_normal(&t.neumann, &t.neumann_dual, du)?;
    let neumann_error = x_prec.difference(&exact)?.l2_norm()? / exact.l2_norm()?;

    let sl = potential_single_layer(kernel, &t.neumann, &inside, Default::default())?;
    let dl = potential_double_layer(kernel, &t.dirichlet, &inside, Default::default())?;
    let gc = g.coefficients()?;
    let reconstruction_error = inside
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let val: c64 = (0..cq.len()).map(|j| sl[(i, j)] * cq[j]).sum::<c64>() - (0..gc.len()).map(|j| dl[(i, j)] * gc[j]).sum::<c64>();
            (val - u(x)).norm() / u(x).norm()
        })
        .fold(0.0, f64::max);

    Ok(DirichletRow {
        label: lm.label.clone(),
        dirichlet_dofs: t.dirichlet.global_dof_count(),
        neumann_dofs: t.neumann.global_dof_count(),
        plain,
        preconditioned,
        coefficient_difference,
        neumann_error,
        reconstruction_error,
        assembly_time,
    })
}

pub fn run(config: &RunConfig) -> Result<DirichletOutcome> {
    let k = config.k.unwrap_or(0.0);
    let tol = config.tol.unwrap_or(DEFAULT_TOL);
    let recipe = config.recipe();
    let meshes = config.meshes()?;
    let mut report = Report::new("Interior Dirichlet problem: V phi = (1/2 Id + K) g, plain and preconditioned by W");
    report.line(format!("wavenumber k = {k}, spaces = {recipe:?}, GMRES tol = {tol} (relative residual, no restart)"));
    report.line("manufactured solution u(x) = G(x, x0) with x0 outside the surface");
    let mut rows = Vec::new();
    let mut table = Table::new(&[
        "mesh",
        "dirichlet_dofs",
        "neumann_dofs",
        "iterations_plain",
        "iterations_preconditioned",
        "coefficient_difference",
        "neumann_error",
        "reconstruction_error",
        "assembly_seconds",
    ]);
    for lm in &meshes {
        let row = solve_one(lm, k, recipe, config.orders(), tol)?;
        report.line(format!(
            "{}: dofs {}/{}, iterations plain {} preconditioned {}, coefficient difference {:.3e}, Neumann error {:.3e}, reconstruction error {:.3e}, assembly {:.1}s",
            row.label,
            row.dirichlet_dofs,
            row.neumann_dofs,
            row.plain.iterations,
            row.preconditioned.iterations,
            row.coefficient_difference,
            row.neumann_error,
            row.reconstruction_error,
            row.assembly_time
        ));
        report.check(format!("{} converged", row.label), row.plain.converged && row.preconditioned.converged, format!(
            "plain {} in {} iterations, preconditioned {} in {}",
            row.plain.converged, row.plain.iterations, row.preconditioned.converged, row.preconditioned.iterations
        ));
        report.check(
            format!("{} solutions agree", row.label),
            row.coefficient_difference <= 1e-6,
            format!("relative coefficient difference {:e} <= 1e-6", row.coefficient_difference),
        );
        table.push(vec![
            row.label.clone(),
            row.dirichlet_dofs.to_string(),
            row.neumann_dofs.to_string(),
            row.plain.iterations.to_string(),
            row.preconditioned.iterations.to_string(),
            num(row.coefficient_difference),
            num(row.neumann_error),
            num(row.reconstruction_error),
            num(row.assembly_time),
        ]);
        rows.push(row);
    }
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        if rows.len() > 1 {
            let growth = |a: &SolveReport, b: &SolveReport| b.iterations as f64 / a.iterations.max(1) as f64;
            let gp = growth(&first.preconditioned, &last.preconditioned);
            let gv = growth(&first.plain, &last.plain);
            report.check(
                "preconditioned iterations stay bounded",
                gp <= 1.5 && gv > gp,
                format!("growth from coarsest to finest: preconditioned {gp:.3}, plain {gv:.3}"),
            );
        }
    }
    report.table("iterations.csv", table);
    Ok(DirichletOutcome { rows, report })
}
