//! Three assembly routes for the hypersingular operator on P1: direct,
//! congruence of the discontinuous assembly, and single-layer composition.

use std::time::Instant;

use bemalg::algebra::BoundaryOperator;
use bemalg::assembly::{hypersingular_by_projection, hypersingular_via_single_layer, Kernel, OperatorKind};
use bemalg::space::{FunctionSpace, SpaceKind};
use bemalg::{c64, Result};
use faer::Mat;

use crate::{num, Report, RunConfig, Table};

#[derive(Debug, Clone)]
pub struct HypBenchRow {
    pub label: String,
    pub faces: usize,
    pub continuous_dofs: usize,
    pub discontinuous_dofs: usize,
    pub direct_seconds: f64,
    pub projection_seconds: f64,
    pub single_layer_seconds: f64,
    /// Relative max-norm differences against the direct matrix.
    pub projection_difference: f64,
    pub single_layer_difference: f64,
    /// `max |W 1| / max |W|`, reported for the Laplace kernel only.
    pub constant_residual: Option<f64>,
}

pub struct HypBenchOutcome {
    pub rows: Vec<HypBenchRow>,
    pub report: Report,
}

fn max_abs(m: &Mat<c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// `max |a - b| / max |b|`.
pub fn relative_max_difference(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    max_abs(&(a - b)) / max_abs(b)
}

pub fn run(config: &RunConfig) -> Result<HypBenchOutcome> {
    let k = config.k.unwrap_or(1.0);
    let kernel = Kernel::helmholtz(k);
    let orders = config.orders();
    let mut report = Report::new("Hypersingular operator on P1: direct, projected and single-layer assembly");
    report.line(format!("wavenumber k = {k}, quadrature orders regular {} singular {}", orders.regular, orders.singular));
    report.line("memory columns are dense matrix sizes: 16 bytes per complex entry");
    let mut table = Table::new(&[
        "mesh",
        "faces",
        "continuous_dofs",
        "discontinuous_dofs",
        "direct_seconds",
        "projection_seconds",
        "single_layer_seconds",
        "continuous_bytes",
        "discontinuous_bytes",
        "projection_difference",
        "single_layer_difference",
    ]);
    let mut rows = Vec::new();
    for lm in config.meshes()? {
        let p1 = FunctionSpace::new(SpaceKind::P1, &lm.mesh);
        let dp1 = FunctionSpace::new(SpaceKind::DP1, &lm.mesh);

        let t = Instant::now();
        let direct = BoundaryOperator::elementary(OperatorKind::Hypersingular, kernel, &p1, &p1, &p1, orders)?
            .weak_form()?
            .to_dense();
        let direct_seconds = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let projected = hypersingular_by_projection(kernel, &p1, orders)?;
        let projection_seconds = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let composite = hypersingular_via_single_layer(kernel, &p1, &p1, orders)?.weak_form()?.to_dense();
        let single_layer_seconds = t.elapsed().as_secs_f64();

        let constant_residual = kernel.is_laplace().then(|| {
            let ones = vec![c64::new(1.0, 0.0); direct.ncols()];
            let w1 = (0..direct.nrows())
                .map(|i| (0..direct.ncols()).map(|j| direct[(i, j)] * ones[j]).sum::<c64>().norm())
                .fold(0.0, f64::max);
            w1 / max_abs(&direct)
        });
        let row = HypBenchRow {
            label: lm.label.clone(),
            faces: lm.mesh.element_count(),
            continuous_dofs: p1.global_dof_count(),
            discontinuous_dofs: dp1.global_dof_count(),
            direct_seconds,
            projection_seconds,
            single_layer_seconds,
            projection_difference: relative_max_difference(&projected, &direct),
            single_layer_difference: relative_max_difference(&composite, &direct),
            constant_residual,
        };
        report.line(format!(
            "{}: N = {} / {}, direct {:.2}s, projection {:.2}s, single layer {:.2}s, differences {:.3e} / {:.3e}",
            row.label,
            row.continuous_dofs,
            row.discontinuous_dofs,
            row.direct_seconds,
            row.projection_seconds,
            row.single_layer_seconds,
            row.projection_difference,
            row.single_layer_difference
        ));
        report.check(
            format!("{} projection matches direct", row.label),
            row.projection_difference <= 1e-12,
            format!("{:e} <= 1e-12", row.projection_difference),
        );
        report.check(
            format!("{} single-layer route matches direct", row.label),
            row.single_layer_difference <= 1e-6,
            format!("{:e} <= 1e-6", row.single_layer_difference),
        );
        report.check(
            format!("{} discontinuous dofs are 3 per face", row.label),
            row.discontinuous_dofs == 3 * row.faces,
            format!("{} = 3 x {}", row.discontinuous_dofs, row.faces),
        );
        if let Some(r) = row.constant_residual {
            report.check(format!("{} annihilates constants", row.label), r <= 1e-8, format!("max|W 1| / max|W| = {r:e} <= 1e-8"));
        }
        let bytes = |n: usize| (16 * n * n).to_string();
        table.push(vec![
            row.label.clone(),
            row.faces.to_string(),
            row.continuous_dofs.to_string(),
            row.discontinuous_dofs.to_string(),
            num(row.direct_seconds),
            num(row.projection_seconds),
            num(row.single_layer_seconds),
            bytes(row.continuous_dofs),
            bytes(row.discontinuous_dofs),
            num(row.projection_difference),
            num(row.single_layer_difference),
        ]);
        rows.push(row);
    }
    report.table("hypersingular.csv", table);
    Ok(HypBenchOutcome { rows, report })
}
