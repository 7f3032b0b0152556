//! Idempotency, sign self-tests and spectrum of a Calderón projector.

use bemalg::algebra::{split, BlockedOperator, GridFunction};
use bemalg::assembly::Kernel;
use bemalg::calderon::{multitrace_identity, multitrace_with_orders, Recipe, Side, TraceSpaces};
use bemalg::mesh::Point;
use bemalg::solver::{dense_eig, dense_svd};
use bemalg::space::FunctionSpace;
use bemalg::{c64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{num, Report, RunConfig, Table};

/// Largest blocked dimension materialised densely.
pub const DENSE_LIMIT: usize = 6000;
pub const PROBE_SEED: u64 = 7;

#[derive(Debug, Clone)]
pub struct CalderonRow {
    pub label: String,
    pub dirichlet_dofs: usize,
    pub neumann_dofs: usize,
    /// `|C² u - C u| / |C² u|` per trace for `u = [1, 1]`.
    pub error_dirichlet: f64,
    pub error_neumann: f64,
    /// `|C² x - C x| / |C x|` for a seeded random `x`.
    pub random_defect: f64,
    /// `|C⁻[1, 0] - [1, 0]| / |[1, 0]|`; constants solve only the Laplace
    /// equation, so this is measured at `k = 0` only.
    pub interior_constant_defect: Option<f64>,
    /// `|C⁻ U| / |U|` for exterior Cauchy data `U` of an interior source.
    pub exterior_annihilation: f64,
    /// Singular values of the dense strong form, descending.
    pub singular_values: Vec<f64>,
    pub eigenvalues: Vec<c64>,
    /// Number of singular values before the largest consecutive ratio.
    pub drop_index: usize,
    pub drop_ratio: f64,
    pub near_one: usize,
    pub near_zero: usize,
    pub elsewhere: usize,
}

pub struct CalderonOutcome {
    pub rows: Vec<CalderonRow>,
    pub report: Report,
}

fn functions(parts: &[Vec<c64>], spaces: &[FunctionSpace]) -> Result<Vec<GridFunction>> {
    parts.iter().zip(spaces).map(|(c, s)| GridFunction::from_coefficients(s, c.clone())).collect()
}

fn l2_pair(fs: &[GridFunction]) -> Result<f64> {
    Ok(fs.iter().map(|f| f.l2_norm().map(|n| n * n)).sum::<Result<f64>>()?.sqrt())
}

fn l2_pair_difference(a: &[GridFunction], b: &[GridFunction]) -> Result<f64> {
    let d: Vec<GridFunction> = a.iter().zip(b).map(|(x, y)| x.difference(y)).collect::<Result<_>>()?;
    l2_pair(&d)
}

fn stack(fs: &[GridFunction]) -> Result<Vec<c64>> {
    let mut out = Vec::new();
    for f in fs {
        out.extend(f.coefficients()?);
    }
    Ok(out)
}

/// Applies the strong form of `op` to a Cauchy pair.
pub fn apply_strong(op: &BlockedOperator, fs: &[GridFunction]) -> Result<Vec<GridFunction>> {
    let y = op.strong_form()?.matvec(&stack(fs)?);
    functions(&split(&y, op.ranges()), op.ranges())
}

fn analyse(lm: &crate::LabelledMesh, k: f64, side: Side, recipe: Recipe, config: &RunConfig) -> Result<CalderonRow> {
    let mesh = &lm.mesh;
    let t = TraceSpaces::new(mesh, recipe);
    let (nd, nn) = (t.dirichlet.global_dof_count(), t.neumann.global_dof_count());
    if nd + nn > DENSE_LIMIT {
        return Err(Error::Capacity(format!(
            "{}: projector has dimension {} above the dense limit {DENSE_LIMIT}; use a coarser mesh",
            lm.label,
            nd + nn
        )));
    }
    let a = multitrace_with_orders(mesh, k, recipe, config.orders())?;
    let half = multitrace_identity(mesh, recipe)?.scale(0.5);
    let interior = half.sum(&a)?;
    let c = match side {
        Side::Interior => interior.clone(),
        Side::Exterior => half.difference(&a)?,
    };
    let spaces = c.domains().to_vec();
    let one = |n| vec![c64::new(1.0, 0.0); n];
    let zero = |n| vec![c64::new(0.0, 0.0); n];

    let u0 = functions(&[one(nd), one(nn)], &spaces)?;
    let u1 = apply_strong(&c, &u0)?;
    let u2 = apply_strong(&c, &u1)?;
    let rel = |i: usize| -> Result<f64> { Ok(u2[i].difference(&u1[i])?.l2_norm()? / u2[i].l2_norm()?) };
    let (error_dirichlet, error_neumann) = (rel(0)?, rel(1)?);

    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut random = |n| (0..n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>();
    let x = functions(&[random(nd), random(nn)], &spaces)?;
    let x1 = apply_strong(&c, &x)?;
    let x2 = apply_strong(&c, &x1)?;
    let random_defect = l2_pair_difference(&x2, &x1)? / l2_pair(&x1)?;

    let interior_constant_defect = if k == 0.0 {
        let e = functions(&[one(nd), zero(nn)], &spaces)?;
        let ce = apply_strong(&interior, &e)?;
        Some(l2_pair_difference(&ce, &e)? / l2_pair(&e)?)
    } else {
        None
    };

    let kernel = Kernel::helmholtz(k);
    let n_v = mesh.vertex_count() as f64;
    let source: Point = std::array::from_fn(|i| mesh.vertices().iter().map(|v| v[i]).sum::<f64>() / n_v);
    let gd = GridFunction::project(&t.dirichlet, &t.dirichlet_dual, |x| kernel.value(x, source))?;
    let gn = GridFunction::project_with_normal(&t.neumann, &t.neumann_dual, |x, nu| {
        let d: Point = std::array::from_fn(|i| x[i] - source[i]);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        kernel.radial_at(r) * (d[0] * nu[0] + d[1] * nu[1] + d[2] * nu[2])
    })?;
    let u_ext = [gd, gn];
    let exterior_annihilation = l2_pair(&apply_strong(&interior, &u_ext)?)? / l2_pair(&u_ext)?;

    let dense = c.strong_form()?.to_dense();
    let singular_values = dense_svd(dense.as_ref())?;
    let mut eigenvalues = dense_eig(dense.as_ref())?;
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    let (drop_index, drop_ratio) = singular_values
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, w[0] / w[1].max(f64::MIN_POSITIVE)))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let near_one = eigenvalues.iter().filter(|l| (*l - 1.0).norm() < 0.2).count();
    let near_zero = eigenvalues.iter().filter(|l| l.norm() < 0.2).count();
    Ok(CalderonRow {
        label: lm.label.clone(),
        dirichlet_dofs: nd,
        neumann_dofs: nn,
        error_dirichlet,
        error_neumann,
        random_defect,
        interior_constant_defect,
        exterior_annihilation,
        elsewhere: eigenvalues.len() - near_one - near_zero,
        singular_values,
        eigenvalues,
        drop_index,
        drop_ratio,
        near_one,
        near_zero,
    })
}

fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect()
}

pub fn run(config: &RunConfig) -> Result<CalderonOutcome> {
    let k = config.k.unwrap_or(2.0);
    let side = config.projector_side();
    let recipe = config.recipe();
    let name = match side {
        Side::Interior => "interior projector 1/2 Id + A",
        Side::Exterior => "exterior projector 1/2 Id - A",
    };
    let mut report = Report::new(&format!("Calderón {name}, A = [[-K, V], [W, K']]"));
    report.line(format!("wavenumber k = {k}, spaces = {recipe:?}, random probe seed {PROBE_SEED}"));
    let mut summary = Table::new(&[
        "mesh",
        "dirichlet_dofs",
        "neumann_dofs",
        "error_dirichlet",
        "error_neumann",
        "random_defect",
        "interior_constant_defect",
        "exterior_annihilation",
        "drop_index",
        "drop_ratio",
        "eigenvalues_near_one",
        "eigenvalues_near_zero",
        "eigenvalues_elsewhere",
    ]);
    let mut rows = Vec::new();
    for lm in config.meshes()? {
        let row = analyse(&lm, k, side, recipe, config)?;
        report.line(format!(
            "{}: dofs {}/{}; error_dirichlet {:.3e}, error_neumann {:.3e}, random defect {:.3e}",
            row.label, row.dirichlet_dofs, row.neumann_dofs, row.error_dirichlet, row.error_neumann, row.random_defect
        ));
        if let Some(d) = row.interior_constant_defect {
            report.line(format!("  interior constant solution: |C-[1,0] - [1,0]| {d:.3e}"));
        }
        report.line(format!("  exterior data of an interior source: |C- U| / |U| {:.3e}", row.exterior_annihilation));
        report.line(format!(
            "  singular values drop after index {} (ratio {:.3e}: {:.3e} -> {:.3e}); eigenvalues near 1: {}, near 0: {}, elsewhere: {}",
            row.drop_index,
            row.drop_ratio,
            row.singular_values[row.drop_index - 1],
            row.singular_values[row.drop_index],
            row.near_one,
            row.near_zero,
            row.elsewhere
        ));
        report.check(
            format!("{} idempotent", row.label),
            row.error_dirichlet <= 5e-2 && row.error_neumann <= 5e-2,
            format!("{:e}, {:e} <= 5e-2", row.error_dirichlet, row.error_neumann),
        );
        let constant = row.interior_constant_defect.unwrap_or(0.0);
        report.check(
            format!("{} sign tests", row.label),
            constant <= 5e-2 && row.exterior_annihilation <= 5e-2,
            format!("{constant:e}, {:e} <= 5e-2", row.exterior_annihilation),
        );
        let expect = match side {
            Side::Exterior => row.dirichlet_dofs,
            Side::Interior => row.neumann_dofs,
        };
        report.check(
            format!("{} singular value drop", row.label),
            row.drop_index == expect && row.drop_ratio >= 10.0,
            format!("index {} (expected {expect}), ratio {:e} >= 10", row.drop_index, row.drop_ratio),
        );
        let tolerance = (0.02 * expect as f64).floor() as usize;
        report.check(
            format!("{} eigenvalue clusters", row.label),
            row.near_one.abs_diff(expect) <= tolerance && row.elsewhere == 0,
            format!("{} near 1 (expected {expect} +- {tolerance}), {} outside both clusters", row.near_one, row.elsewhere),
        );
        summary.push(vec![
            row.label.clone(),
            row.dirichlet_dofs.to_string(),
            row.neumann_dofs.to_string(),
            num(row.error_dirichlet),
            num(row.error_neumann),
            num(row.random_defect),
            row.interior_constant_defect.map_or(String::new(), num),
            num(row.exterior_annihilation),
            row.drop_index.to_string(),
            num(row.drop_ratio),
            row.near_one.to_string(),
            row.near_zero.to_string(),
            row.elsewhere.to_string(),
        ]);
        let mut sv = Table::new(&["index", "singular_value"]);
        for (i, s) in row.singular_values.iter().enumerate() {
            sv.push(vec![(i + 1).to_string(), num(*s)]);
        }
        let mut ev = Table::new(&["index", "real", "imag"]);
        for (i, l) in row.eigenvalues.iter().enumerate() {
            ev.push(vec![(i + 1).to_string(), num(l.re), num(l.im)]);
        }
        let stem = file_stem(&row.label);
        report.table(&format!("singular_values_{stem}.csv"), sv);
        report.table(&format!("eigenvalues_{stem}.csv"), ev);
        rows.push(row);
    }
    if rows.len() > 1 {
        let decreasing = rows
            .windows(2)
            .all(|w| w[1].error_dirichlet < w[0].error_dirichlet && w[1].error_neumann < w[0].error_neumann);
        report.check("idempotency improves under refinement", decreasing, "both errors decrease from each mesh to the next");
    }
    report.table("calderon.csv", summary);
    Ok(CalderonOutcome { rows, report })
}
