//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::sync::Arc;
use std::time::Instant;

use bemalg::algebra::{mass_matrix, BoundaryOperator, DiscreteOperator, GridFunction};
use bemalg::assembly::{assemble_dense, Kernel, OperatorKind, Request};
use bemalg::mesh::{make_cube, make_sphere};
use bemalg::quadrature::QuadratureOrders;
use bemalg::solver::generalized_eigenvalues_hermitian;
use bemalg::space::{FunctionSpace, SpaceKind};
use bemalg::{c64, Error};
use bemalg_cli::{calderon, dirichlet, hyp_bench, transmission, ProjectorSide, RunConfig, Spaces};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), notes: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }
}

type Criterion = fn(&mut Outcome) -> bemalg::Result<()>;

fn rel(a: &[c64], b: &[c64]) -> f64 {
    bemalg_cli::relative_difference(a, b)
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<c64> {
    (0..n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn random_mat(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Mat<c64> {
    Mat::from_fn(r, c, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn algebra_laws(o: &mut Outcome) -> bemalg::Result<()> {
    let start = Instant::now();
    let mesh = Arc::new(make_sphere(2)?);
    let s = |k| FunctionSpace::new(k, &mesh);
    let (p1, dp1, p0) = (s(SpaceKind::P1), s(SpaceKind::DP1), s(SpaceKind::P0));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let op = |d: &FunctionSpace, r: &FunctionSpace, rng: &mut ChaCha8Rng| {
        BoundaryOperator::from_weak_form(d, r, r, "random", DiscreteOperator::dense(random_mat(r.global_dof_count(), d.global_dof_count(), rng)))
    };
    let a = op(&p1, &dp1, &mut rng)?;
    let b = op(&dp1, &p0, &mut rng)?;
    let c = op(&p0, &p1, &mut rng)?;
    let x = random_vec(p1.global_dof_count(), &mut rng);

    let left = c.product(&b.product(&a)?)?.weak_form()?.matvec(&x);
    let right = c.product(&b)?.product(&a)?.weak_form()?.matvec(&x);
    let e = rel(&left, &right);
    o.expect(e <= 1e-12, format!("associativity {e:.1e}"));

    let id_range = BoundaryOperator::identity(&dp1, &dp1, &dp1)?;
    let id_domain = BoundaryOperator::identity(&p1, &p1, &p1)?;
    let ax = a.weak_form()?.matvec(&x);
    let e_left = rel(&id_range.product(&a)?.weak_form()?.matvec(&x), &ax);
    let e_right = rel(&a.product(&id_domain)?.weak_form()?.matvec(&x), &ax);
    o.expect(e_left <= 1e-12 && e_right <= 1e-12, format!("unit laws {e_left:.1e}/{e_right:.1e}"));

    let composed = b.product(&a)?.strong_form()?.matvec(&x);
    let chained = b.strong_form()?.matvec(&a.strong_form()?.matvec(&x));
    let e = rel(&composed, &chained);
    o.expect(e <= 1e-12, format!("strong-form composition {e:.1e}"));

    // Caching: two assembled operators and one pairing, however often used.
    let fresh = Arc::new(make_sphere(2)?);
    let (q0, q1) = (FunctionSpace::new(SpaceKind::P0, &fresh), FunctionSpace::new(SpaceKind::P1, &fresh));
    let v = BoundaryOperator::single_layer(Kernel::laplace(), &q0, &q0, &q0)?;
    let k = BoundaryOperator::double_layer(Kernel::laplace(), &q1, &q0, &q0)?;
    let vk = v.product(&k)?;
    let expr = vk.sum(&v.product(&vk)?)?.sum(&v.product(&v.product(&k)?)?)?;
    let y = random_vec(q1.global_dof_count(), &mut rng);
    let first = expr.weak_form()?.matvec(&y);
    let again = expr.strong_form()?.matvec(&y);
    let counters = fresh.counters();
    o.expect(
        counters.assemblies() == 2 && counters.factorizations() == 1 && first.len() == again.len(),
        format!("counters: {} assemblies, {} factorizations (expected 2, 1)", counters.assemblies(), counters.factorizations()),
    );
    let secs = start.elapsed().as_secs_f64();
    o.expect(secs < 30.0, format!("{secs:.1}s < 30s"));
    Ok(())
}

fn sphere_identities(o: &mut Outcome) -> bemalg::Result<()> {
    let start = Instant::now();
    let four_pi = 4.0 * std::f64::consts::PI;
    for (level, tol) in [(3, 0.02), (4, 0.007)] {
        let mesh = Arc::new(make_sphere(level)?);
        let p0 = FunctionSpace::new(SpaceKind::P0, &mesh);
        let v = BoundaryOperator::single_layer(Kernel::laplace(), &p0, &p0, &p0)?.weak_form()?;
        let ones = vec![c64::new(1.0, 0.0); p0.global_dof_count()];
        let total: c64 = v.matvec(&ones).iter().sum();
        let e = (total.re - four_pi).abs() / four_pi;
        o.expect(e <= tol, format!("level {level} <V1,1> error {e:.2e} <= {tol}"));
    }
    let mut previous = f64::INFINITY;
    for level in [3, 4] {
        let mesh = Arc::new(make_sphere(level)?);
        let p1 = FunctionSpace::new(SpaceKind::P1, &mesh);
        let v = BoundaryOperator::single_layer(Kernel::laplace(), &p1, &p1, &p1)?.weak_form()?.to_dense();
        let m = mass_matrix(&p1, &p1)?.to_dense();
        let mut eig = generalized_eigenvalues_hermitian(v.as_ref(), m.as_ref())?;
        eig.reverse();
        let expected: Vec<f64> = (0..3).flat_map(|n: usize| std::iter::repeat(1.0 / (2 * n + 1) as f64).take(2 * n + 1)).collect();
        let err = eig.iter().zip(&expected).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
        o.expect(err <= 0.05, format!("level {level} eigenvalues 1, 1/3, 1/5 max error {err:.2e} <= 5e-2"));
        if previous.is_finite() {
            o.expect(err < previous, format!("level {level} improves on {previous:.2e}"));
        }
        previous = err;
    }
    let secs = start.elapsed().as_secs_f64();
    o.expect(secs < 300.0, format!("{secs:.0}s < 300s"));
    Ok(())
}

fn hypersingular_equivalence(o: &mut Outcome) -> bemalg::Result<()> {
    let start = Instant::now();
    for k in [0.0, 1.0] {
        let config = RunConfig { k: Some(k), ..RunConfig::sphere(&[1, 2, 3]) };
        let out = hyp_bench::run(&config)?;
        for r in &out.rows {
            o.expect(
                r.projection_difference <= 1e-12 && r.single_layer_difference <= 1e-6,
                format!("k={k} {}: projection {:.1e}, single layer {:.1e}", r.label, r.projection_difference, r.single_layer_difference),
            );
            if let Some(c) = r.constant_residual {
                o.expect(c <= 1e-8, format!("k=0 {}: W1 {c:.1e}", r.label));
            }
            o.notes.push(format!("times {:.2}/{:.2}/{:.2}s", r.direct_seconds, r.projection_seconds, r.single_layer_seconds));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    o.expect(secs < 600.0, format!("{secs:.0}s < 600s"));
    Ok(())
}

fn calderon_projector(o: &mut Outcome) -> bemalg::Result<()> {
    let start = Instant::now();
    let config = RunConfig { k: Some(2.0), ..RunConfig::cube(&[0.25, 0.125]) };
    let out = calderon::run(&config)?;
    let (coarse, fine) = (&out.rows[0], &out.rows[1]);
    o.expect(
        coarse.error_dirichlet <= 5e-2 && coarse.error_neumann <= 5e-2,
        format!("h=0.25 errors {:.2e}/{:.2e}", coarse.error_dirichlet, coarse.error_neumann),
    );
    o.expect(
        fine.error_dirichlet < coarse.error_dirichlet && fine.error_neumann < coarse.error_neumann,
        format!("h=0.125 errors {:.2e}/{:.2e}", fine.error_dirichlet, fine.error_neumann),
    );
    for r in &out.rows {
        o.expect(
            r.drop_index == r.dirichlet_dofs && r.drop_ratio >= 10.0,
            format!("{} drop at {} of {} (ratio {:.0})", r.label, r.drop_index, r.dirichlet_dofs, r.drop_ratio),
        );
        let allowed = (0.02 * r.dirichlet_dofs as f64).floor() as usize;
        o.expect(
            r.near_one.abs_diff(r.dirichlet_dofs) <= allowed && r.elsewhere == 0,
            format!("{} clusters {}/{}/{}", r.label, r.near_one, r.near_zero, r.elsewhere),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    o.expect(secs < 900.0, format!("{secs:.0}s < 900s"));
    Ok(())
}

fn sign_tests(o: &mut Outcome) -> bemalg::Result<()> {
    let config = RunConfig { k: Some(0.0), side: ProjectorSide::Interior, ..RunConfig::cube(&[0.5, 0.25]) };
    let out = calderon::run(&config)?;
    let (coarse, fine) = (&out.rows[0], &out.rows[1]);
    let (c0, c1) = (coarse.interior_constant_defect.unwrap(), fine.interior_constant_defect.unwrap());
    o.expect(c0 <= 5e-2 && c1 < c0, format!("C-[1,0] defect {c0:.2e} -> {c1:.2e}"));
    let (a0, a1) = (coarse.exterior_annihilation, fine.exterior_annihilation);
    o.expect(a0 <= 5e-2 && a1 < a0, format!("C- U_ext {a0:.2e} -> {a1:.2e}"));

    let mesh = Arc::new(make_sphere(2)?);
    let p1 = FunctionSpace::new(SpaceKind::P1, &mesh);
    let req = |kind| Request { kind, domain: p1.clone(), dual: p1.clone() };
    let m = assemble_dense(Kernel::helmholtz(2.0), &[req(OperatorKind::DoubleLayer), req(OperatorKind::AdjointDoubleLayer)], QuadratureOrders::default())?;
    let (k, kp) = (&m[0], &m[1]);
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            diff = diff.max((kp[(i, j)] - k[(j, i)]).norm());
            scale = scale.max(k[(j, i)].norm());
        }
    }
    o.expect(diff / scale <= 1e-12, format!("K' vs K^T {:.1e}", diff / scale));
    Ok(())
}

fn preconditioned_dirichlet(o: &mut Outcome) -> bemalg::Result<()> {
    let config = RunConfig { spaces: Spaces::P1, ..RunConfig::sphere(&[2, 3, 4]) };
    let out = dirichlet::run(&config)?;
    for r in &out.rows {
        o.expect(
            r.plain.converged && r.preconditioned.converged && r.coefficient_difference <= 1e-6,
            format!("{}: difference {:.1e}, iterations {}/{}", r.label, r.coefficient_difference, r.plain.iterations, r.preconditioned.iterations),
        );
    }
    let (first, last) = (&out.rows[0], &out.rows[2]);
    let gp = last.preconditioned.iterations as f64 / first.preconditioned.iterations as f64;
    let gv = last.plain.iterations as f64 / first.plain.iterations as f64;
    o.expect(gp <= 1.5 && gv > gp, format!("growth preconditioned {gp:.2}, plain {gv:.2}"));
    let e = out.rows[1].reconstruction_error;
    o.expect(e <= 1e-3, format!("level 3 reconstruction {e:.1e}"));
    Ok(())
}

fn transmission_problem(o: &mut Outcome) -> bemalg::Result<()> {
    let start = Instant::now();
    let tol = 1e-5;
    let config = RunConfig { k: Some(10.0), n: 0.8, tol: Some(tol), use_strong_form: true, ..RunConfig::cube(&[0.25, 0.125]) };
    let out = transmission::run(&config)?;
    let (coarse, fine) = (&out.rows[0], &out.rows[1]);
    let coarse_secs = start.elapsed().as_secs_f64();
    o.expect(
        coarse.solve.converged && coarse.solve.iterations <= 15,
        format!("h=0.25 {} iterations", coarse.solve.iterations),
    );
    o.expect(
        fine.solve.converged && coarse.solve.iterations.abs_diff(fine.solve.iterations) <= 3,
        format!("h=0.125 {} iterations", fine.solve.iterations),
    );
    for r in &out.rows {
        o.expect(r.unsquared_residual <= 10.0 * tol, format!("{} unsquared residual {:.1e}", r.label, r.unsquared_residual));
    }
    let null = RunConfig { n: 1.0, hs: vec![0.125], ..config };
    let out = transmission::run(&null)?;
    let d = out.rows[0].intensity_deviation;
    o.expect(d <= 5e-2, format!("n=1 at h=0.125: deviation {d:.1e}"));
    o.expect(coarse_secs < 1200.0, format!("{:.0}s total", start.elapsed().as_secs_f64()));
    Ok(())
}

fn grid_function_contract(o: &mut Outcome) -> bemalg::Result<()> {
    let mesh = Arc::new(make_cube(0.25)?);
    let s = |k| FunctionSpace::new(k, &mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs = [
        (SpaceKind::P1, SpaceKind::P1),
        (SpaceKind::BP1, SpaceKind::Dual0),
        (SpaceKind::Dual0, SpaceKind::BP1),
        (SpaceKind::DP1, SpaceKind::DP1),
        (SpaceKind::P0, SpaceKind::P0),
    ];
    for (a, b) in pairs {
        let (space, dual) = (s(a), s(b));
        let c = random_vec(space.global_dof_count(), &mut rng);
        let f = GridFunction::from_coefficients(&space, c.clone())?;
        let g = GridFunction::from_projections(&space, &dual, f.projections(&dual)?)?;
        let e = rel(&g.coefficients()?, &c);
        o.expect(e <= 1e-12, format!("{a}/{b} round trip {e:.1e}"));
    }
    let (p1, p0) = (s(SpaceKind::P1), s(SpaceKind::P0));
    let f = GridFunction::from_projections(&p1, &p0, vec![c64::new(1.0, 0.0); p0.global_dof_count()])?;
    let raised = matches!(f.coefficients(), Err(Error::ConversionUnavailable(_)));
    o.expect(raised, "rectangular P1/P0 pairing raises conversion-unavailable".into());
    Ok(())
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("algebra laws and caching", algebra_laws),
        ("analytic sphere identities", sphere_identities),
        ("hypersingular equivalence", hypersingular_equivalence),
        ("Calderón projector", calderon_projector),
        ("sign and identity self-tests", sign_tests),
        ("preconditioned Dirichlet problem", preconditioned_dirichlet),
        ("transmission problem", transmission_problem),
        ("grid function contract", grid_function_contract),
    ];
    // `cargo test -- <filter>` selects criteria by number or name.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filters.is_empty() && !filters.iter().any(|q| *q == id || name.contains(q.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut o = Outcome::new();
        if let Err(e) = f(&mut o) {
            o.failures.push(format!("error: {e}"));
        }
        let secs = start.elapsed().as_secs_f64();
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if o.failures.is_empty() { o.notes.join("; ") } else { o.failures.join("; ") };
        println!("criterion {id} [{status}] {name} ({secs:.1}s): {detail}");
        if !o.failures.is_empty() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
