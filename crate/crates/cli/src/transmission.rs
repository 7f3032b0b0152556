//! Acoustic transmission through a penetrable object, preconditioned by
//! squaring the multitrace sum.

use std::f64::consts::PI;

use bemalg::algebra::{BlockedOperator, GridFunction};
use bemalg::assembly::{potential_double_layer, potential_single_layer, Kernel};
use bemalg::calderon::{multitrace_identity, multitrace_with_orders, TraceSpaces};
use bemalg::mesh::{point_triangle_distance, Point, SurfaceMesh};
use bemalg::solver::{gmres_blocked, GmresOptions, SolveReport};
use bemalg::{c64, Error, Result};
use faer::Mat;

use crate::calderon::apply_strong;
use crate::{num, LabelledMesh, Report, RunConfig, Table};

pub const DEFAULT_K: f64 = 10.0;
pub const DEFAULT_TOL: f64 = 1e-5;
pub const DIRECTION: Point = [1.0, 0.0, 0.0];
/// Slice points closer than this to the surface are skipped.
pub const SKIP_DISTANCE: f64 = 0.05;
pub const SLICE_HEIGHT: f64 = 0.5;
pub const SLICE_POINTS: usize = 101;
pub const SLICE_RANGE: (f64, f64) = (-1.0, 2.0);

#[derive(Debug, Clone)]
pub struct SlicePoint {
    pub x: f64,
    pub y: f64,
    pub inside: bool,
    /// Total field, `None` for skipped points.
    pub field: Option<c64>,
}

#[derive(Debug, Clone)]
pub struct TransmissionRow {
    pub label: String,
    pub dirichlet_dofs: usize,
    pub neumann_dofs: usize,
    pub solve: SolveReport,
    /// Relative residual of the unsquared equation, Riesz-mapped and
    /// measured in the L² norm of the Cauchy pair.
    pub unsquared_residual: f64,
    pub slice: Vec<SlicePoint>,
    /// RMS of `|u|² - |u_inc|²` over evaluated slice points, relative to the
    /// RMS of `|u_inc|²`.
    pub intensity_deviation: f64,
}

pub struct TransmissionOutcome {
    pub rows: Vec<TransmissionRow>,
    pub report: Report,
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

/// Solid angle of the closed surface seen from `p` over `4 pi`: one inside,
/// zero outside.
pub fn winding_number(mesh: &SurfaceMesh, p: Point) -> f64 {
    let total: f64 = (0..mesh.element_count())
        .map(|e| {
            let [a, b, c] = mesh.corners(e).map(|v| sub(v, p));
            let (la, lb, lc) = (norm(a), norm(b), norm(c));
            let num = dot(a, cross(b, c));
            let den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
            2.0 * num.atan2(den)
        })
        .sum();
    total / (4.0 * PI)
}

fn incident(k: f64) -> impl Fn(Point) -> c64 + Copy {
    move |x| {
        let (s, c) = (k * dot(DIRECTION, x)).sin_cos();
        c64::new(c, s)
    }
}

fn incident_normal(k: f64) -> impl Fn(Point, Point) -> c64 + Copy {
    move |x, nu| incident(k)(x) * c64::new(0.0, k * dot(DIRECTION, nu))
}

fn contract(m: &Mat<c64>, i: usize, c: &[c64]) -> c64 {
    (0..c.len()).map(|j| m[(i, j)] * c[j]).sum()
}

fn pair_l2(fs: &[GridFunction]) -> Result<f64> {
    Ok(fs.iter().map(|f| f.l2_norm().map(|n| n * n)).sum::<Result<f64>>()?.sqrt())
}

fn solve_one(lm: &LabelledMesh, k: f64, n: f64, tol: f64, config: &RunConfig) -> Result<TransmissionRow> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("transmission needs k > 0, got {k}")));
    }
    let mesh = &lm.mesh;
    let recipe = config.recipe();
    let t = TraceSpaces::new(mesh, recipe);
    let orders = config.orders();
    let a_minus = multitrace_with_orders(mesh, n * k, recipe, orders)?;
    let a_plus = if n == 1.0 { a_minus.clone() } else { multitrace_with_orders(mesh, k, recipe, orders)? };
    let half = multitrace_identity(mesh, recipe)?.scale(0.5);
    let op = a_minus.sum(&a_plus)?;
    let rhs_op: BlockedOperator = half.difference(&a_minus)?;
    let lhs = op.product(&op)?;
    let squared_rhs_op = op.product(&rhs_op)?;

    let v_inc = [
        GridFunction::project(&t.dirichlet, &t.dirichlet_dual, incident(k))?,
        GridFunction::project_with_normal(&t.neumann, &t.neumann_dual, incident_normal(k))?,
    ];
    let rhs = apply_strong(&squared_rhs_op, &v_inc)?;
    let opts = GmresOptions { tol, use_strong_form: true, ..Default::default() };
    let (v_plus, solve) = gmres_blocked(&lhs, &rhs, opts)?;

    let lhs1 = apply_strong(&op, &v_plus)?;
    let rhs1 = apply_strong(&rhs_op, &v_inc)?;
    let r: Vec<GridFunction> = lhs1.iter().zip(&rhs1).map(|(a, b)| a.difference(b)).collect::<Result<_>>()?;
    let unsquared_residual = pair_l2(&r)? / pair_l2(&rhs1)?;

    // Interior traces from the interface condition.
    let v_minus: Vec<GridFunction> = v_plus.iter().zip(&v_inc).map(|(a, b)| a.sum(b)).collect::<Result<_>>()?;

    let (lo, hi) = SLICE_RANGE;
    let step = (hi - lo) / (SLICE_POINTS - 1) as f64;
    let mut slice = Vec::with_capacity(SLICE_POINTS * SLICE_POINTS);
    for j in 0..SLICE_POINTS {
        for i in 0..SLICE_POINTS {
            let (x, y) = (lo + i as f64 * step, lo + j as f64 * step);
            slice.push(SlicePoint { x, y, inside: false, field: None });
        }
    }
    let mut inside_pts = Vec::new();
    let mut outside_pts = Vec::new();
    for (idx, s) in slice.iter_mut().enumerate() {
        let p = [s.x, s.y, SLICE_HEIGHT];
        let d = (0..mesh.element_count())
            .map(|e| point_triangle_distance(p, mesh.corners(e)))
            .fold(f64::INFINITY, f64::min);
        s.inside = winding_number(mesh, p) > 0.5;
        if d < SKIP_DISTANCE {
            continue;
        }
        if s.inside {
            inside_pts.push((idx, p));
        } else {
            outside_pts.push((idx, p));
        }
    }
    let evaluate = |kernel: Kernel, pts: &[(usize, Point)], traces: &[GridFunction], sign: f64| -> Result<Vec<c64>> {
        if pts.is_empty() {
            return Ok(Vec::new());
        }
        let xs: Vec<Point> = pts.iter().map(|p| p.1).collect();
        let sl = potential_single_layer(kernel, &t.neumann, &xs, Default::default())?;
        let dl = potential_double_layer(kernel, &t.dirichlet, &xs, Default::default())?;
        let (d, nn) = (traces[0].coefficients()?, traces[1].coefficients()?);
        // Interior: V g1 - K g0; exterior scattered field: K g0 - V g1.
        Ok((0..xs.len()).map(|i| sign * (contract(&sl, i, &nn) - contract(&dl, i, &d))).collect())
    };
    let inner = evaluate(Kernel::helmholtz(n * k), &inside_pts, &v_minus, 1.0)?;
    let outer = evaluate(Kernel::helmholtz(k), &outside_pts, &v_plus, -1.0)?;
    let u_inc = incident(k);
    for ((idx, _), u) in inside_pts.iter().zip(inner) {
        slice[*idx].field = Some(u);
    }
    for ((idx, p), u) in outside_pts.iter().zip(outer) {
        slice[*idx].field = Some(u + u_inc(*p));
    }
    let (mut dev, mut base) = (0.0, 0.0);
    for s in &slice {
        if let Some(u) = s.field {
            let inc = u_inc([s.x, s.y, SLICE_HEIGHT]).norm_sqr();
            dev += (u.norm_sqr() - inc).powi(2);
            base += inc * inc;
        }
    }
    Ok(TransmissionRow {
        label: lm.label.clone(),
        dirichlet_dofs: t.dirichlet.global_dof_count(),
        neumann_dofs: t.neumann.global_dof_count(),
        solve,
        unsquared_residual,
        slice,
        intensity_deviation: (dev / base).sqrt(),
    })
}

fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect()
}

pub fn run(config: &RunConfig) -> Result<TransmissionOutcome> {
    let k = config.k.unwrap_or(DEFAULT_K);
    let n = config.n;
    let tol = config.tol.unwrap_or(DEFAULT_TOL);
    let mut report = Report::new("Transmission problem: (A- + A+)^2 V+ = (A- + A+)(1/2 Id - A-) V_inc");
    report.line(format!(
        "k = {k}, n = {n}, spaces = {:?}, GMRES tol = {tol} on the strong form, incident plane wave along {:?}",
        config.recipe(),
        DIRECTION
    ));
    report.line(format!(
        "slice z = {SLICE_HEIGHT}, {SLICE_POINTS}x{SLICE_POINTS} points over [{}, {}]^2, points within {SKIP_DISTANCE} of the surface skipped",
        SLICE_RANGE.0, SLICE_RANGE.1
    ));
    if !config.use_strong_form {
        report.line("the squared system is always solved in strong form");
    }
    let mut table = Table::new(&["mesh", "dirichlet_dofs", "neumann_dofs", "iterations", "converged", "unsquared_residual", "intensity_deviation"]);
    let mut rows = Vec::new();
    for lm in config.meshes()? {
        let row = solve_one(&lm, k, n, tol, config)?;
        let skipped = row.slice.iter().filter(|s| s.field.is_none()).count();
        report.line(format!(
            "{}: dofs {}/{}, {} iterations (converged {}), unsquared residual {:.3e}, |u|^2 deviation from incident {:.3e}, {} slice points skipped",
            row.label,
            row.dirichlet_dofs,
            row.neumann_dofs,
            row.solve.iterations,
            row.solve.converged,
            row.unsquared_residual,
            row.intensity_deviation,
            skipped
        ));
        report.check(format!("{} converged", row.label), row.solve.converged, format!("{} iterations", row.solve.iterations));
        report.check(
            format!("{} unsquared residual", row.label),
            row.unsquared_residual <= 10.0 * tol,
            format!("{:e} <= {:e}", row.unsquared_residual, 10.0 * tol),
        );
        if n == 1.0 {
            report.check(
                format!("{} no contrast, no scattering", row.label),
                row.intensity_deviation <= 5e-2,
                format!("{:e} <= 5e-2", row.intensity_deviation),
            );
        }
        let mut field = Table::new(&["x", "y", "z", "inside", "skipped", "re", "im", "abs2"]);
        for s in &row.slice {
            let (re, im, a2) = match s.field {
                Some(u) => (num(u.re), num(u.im), num(u.norm_sqr())),
                None => (String::new(), String::new(), String::new()),
            };
            field.push(vec![
                num(s.x),
                num(s.y),
                num(SLICE_HEIGHT),
                (s.inside as u8).to_string(),
                (s.field.is_none() as u8).to_string(),
                re,
                im,
                a2,
            ]);
        }
        report.table(&format!("field_{}.csv", file_stem(&row.label)), field);
        table.push(vec![
            row.label.clone(),
            row.dirichlet_dofs.to_string(),
            row.neumann_dofs.to_string(),
            row.solve.iterations.to_string(),
            row.solve.converged.to_string(),
            num(row.unsquared_residual),
            num(row.intensity_deviation),
        ]);
        rows.push(row);
    }
    if rows.len() > 1 {
        let its: Vec<usize> = rows.iter().map(|r| r.solve.iterations).collect();
        let spread = its.iter().max().unwrap() - its.iter().min().unwrap();
        report.check("iterations stable under refinement", spread <= 3, format!("iterations {its:?}, spread {spread} <= 3"));
    }
    report.table("transmission.csv", table);
    Ok(TransmissionOutcome { rows, report })
}
