//! The Laplace single layer of a constant density on the dual cells, mapped
//! into continuous linears, followed by the hypersingular operator into
//! piecewise constants.

use bemalg::algebra::{apply, BoundaryOperator, GridFunction};
use bemalg::assembly::Kernel;
use bemalg::space::{FunctionSpace, SpaceKind};
use bemalg::{c64, Result};

use crate::{num, relative_difference, Report, RunConfig, Table};

#[derive(Debug, Clone)]
pub struct Fig1Row {
    pub label: String,
    /// `V 1` on BP1, one value per vertex.
    pub single_layer: GridFunction,
    /// `W V 1` on DUAL0, one value per dual cell.
    pub hypersingular: GridFunction,
    /// `|(W ⊙ V) 1 - W (V 1)| / |W (V 1)|`.
    pub product_difference: f64,
}

pub struct Fig1Outcome {
    pub rows: Vec<Fig1Row>,
    pub report: Report,
}

pub fn run(config: &RunConfig) -> Result<Fig1Outcome> {
    let kernel = Kernel::laplace();
    let orders = config.orders();
    let mut report = Report::new("Laplace single layer of a constant, then the hypersingular operator");
    report.line("V: DUAL0 -> BP1 tested with DUAL0; W: BP1 -> DUAL0 tested with BP1");
    let mut rows = Vec::new();
    for lm in config.meshes()? {
        let dual0 = FunctionSpace::new(SpaceKind::Dual0, &lm.mesh);
        let bp1 = FunctionSpace::new(SpaceKind::BP1, &lm.mesh);
        let v = BoundaryOperator::elementary(bemalg::assembly::OperatorKind::SingleLayer, kernel, &dual0, &bp1, &dual0, orders)?;
        let w = BoundaryOperator::elementary(bemalg::assembly::OperatorKind::Hypersingular, kernel, &bp1, &dual0, &bp1, orders)?;
        let one = GridFunction::from_coefficients(&dual0, vec![c64::new(1.0, 0.0); dual0.global_dof_count()])?;
        let v1 = apply(&v, &one)?;
        let v1 = GridFunction::from_coefficients(&bp1, v1.coefficients()?)?;
        let wv1 = apply(&w, &v1)?;
        let wv1 = GridFunction::from_coefficients(&dual0, wv1.coefficients()?)?;
        let fused = apply(&w.product(&v)?, &one)?;
        let product_difference = relative_difference(&fused.coefficients()?, &wv1.coefficients()?);

        let vc = v1.coefficients()?;
        let wc = wv1.coefficients()?;
        let min_v = vc.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let max_imag = vc.iter().chain(&wc).map(|z| z.im.abs()).fold(0.0, f64::max);
        report.line(format!(
            "{}: V1 in [{:.4}, {:.4}] on {} vertices; W V1 in [{:.4e}, {:.4e}] on {} dual cells",
            lm.label,
            min_v,
            vc.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
            vc.len(),
            wc.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
            wc.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
            wc.len()
        ));
        report.check(format!("{} V1 positive", lm.label), min_v > 0.0 && max_imag == 0.0, format!("minimum {min_v:e}"));
        report.check(
            format!("{} spaces", lm.label),
            v1.space().kind().is_continuous() && !wv1.space().kind().is_continuous(),
            format!("V1 in {}, W V1 in {}", v1.space().kind(), wv1.space().kind()),
        );
        report.check(
            format!("{} product agrees with sequential application", lm.label),
            product_difference <= 1e-12,
            format!("{product_difference:e} <= 1e-12"),
        );
        let stem: String = lm.label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
        let mut t1 = Table::new(&["vertex", "x", "y", "z", "value"]);
        let mut t2 = Table::new(&["cell", "x", "y", "z", "value"]);
        for (i, p) in lm.mesh.vertices().iter().enumerate() {
            t1.push(vec![i.to_string(), num(p[0]), num(p[1]), num(p[2]), num(vc[i].re)]);
            // Dual cell i surrounds vertex i.
            t2.push(vec![i.to_string(), num(p[0]), num(p[1]), num(p[2]), num(wc[i].re)]);
        }
        report.table(&format!("single_layer_{stem}.csv"), t1);
        report.table(&format!("hypersingular_{stem}.csv"), t2);
        rows.push(Fig1Row { label: lm.label.clone(), single_layer: v1, hypersingular: wv1, product_difference });
    }
    Ok(Fig1Outcome { rows, report })
}
