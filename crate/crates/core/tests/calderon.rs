use std::sync::Arc;

use bemalg::algebra::BoundaryOperator;
use bemalg::assembly::Kernel;
use bemalg::c64;
use bemalg::calderon::{calderon_projector, multitrace_identity, multitrace_operator, transmission_operators, Recipe, Side, TraceSpaces};
use bemalg::mesh::make_cube;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(n: usize, seed: u64) -> Vec<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn rel(a: &[c64], b: &[c64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let n: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (d / n).sqrt()
}

#[test]
fn projectors_sum_to_identity() {
    let mesh = Arc::new(make_cube(0.5).unwrap());
    for recipe in [Recipe::Dual, Recipe::P1] {
        let inside = calderon_projector(&mesh, 2.0, Side::Interior, recipe).unwrap();
        let outside = calderon_projector(&mesh, 2.0, Side::Exterior, recipe).unwrap();
        let x = random(inside.strong_form().unwrap().ncols(), 1);
        let sum: Vec<c64> = inside
            .strong_form()
            .unwrap()
            .matvec(&x)
            .iter()
            .zip(outside.strong_form().unwrap().matvec(&x))
            .map(|(a, b)| a + b)
            .collect();
        assert!(rel(&sum, &x) < 1e-12, "{recipe:?}");
    }
}

#[test]
fn blocked_identity_strong_form_is_identity() {
    let mesh = Arc::new(make_cube(0.5).unwrap());
    let id = multitrace_identity(&mesh, Recipe::Dual).unwrap();
    let x = random(id.strong_form().unwrap().ncols(), 2);
    assert!(rel(&id.strong_form().unwrap().matvec(&x), &x) < 1e-12);
    assert!(id.block(0, 1).is_none() && id.block(1, 0).is_none());
}

#[test]
fn multitrace_blocks_are_the_boundary_operators() {
    let mesh = Arc::new(make_cube(0.5).unwrap());
    let a = multitrace_operator(&mesh, 0.0, Recipe::Dual).unwrap();
    let t = TraceSpaces::new(&mesh, Recipe::Dual);
    let v = BoundaryOperator::single_layer(Kernel::laplace(), &t.neumann, &t.dirichlet, &t.dirichlet_dual).unwrap();
    let x = random(t.neumann.global_dof_count(), 3);
    let block = a.block(0, 1).unwrap();
    assert_eq!(block.domain(), &t.neumann);
    assert_eq!(block.dual_to_range(), &t.dirichlet_dual);
    assert!(rel(&block.weak_form().unwrap().matvec(&x), &v.weak_form().unwrap().matvec(&x)) < 1e-14);
    // Rows share their range and dual spaces.
    assert_eq!(a.ranges(), &[t.dirichlet.clone(), t.neumann.clone()]);
    assert_eq!(a.duals(), &[t.dirichlet_dual.clone(), t.neumann_dual.clone()]);
}

#[test]
fn unit_index_gives_equal_multitraces() {
    let mesh = Arc::new(make_cube(0.5).unwrap());
    let (minus, plus, _) = transmission_operators(&mesh, 3.0, 1.0, Recipe::Dual).unwrap();
    let x = random(minus.weak_form().unwrap().ncols(), 4);
    assert_eq!(rel(&minus.weak_form().unwrap().matvec(&x), &plus.weak_form().unwrap().matvec(&x)), 0.0);
    assert!(transmission_operators(&mesh, 0.0, 1.0, Recipe::Dual).is_err());
    assert!(multitrace_operator(&mesh, -1.0, Recipe::P1).is_err());
}

#[test]
fn squared_transmission_operator_assembles() {
    let mesh = Arc::new(make_cube(0.5).unwrap());
    let (minus, plus, id) = transmission_operators(&mesh, 2.0, 0.8, Recipe::Dual).unwrap();
    let op = minus.sum(&plus).unwrap();
    let rhs = op.product(&id.scale(0.5).difference(&minus).unwrap()).unwrap();
    let squared = op.product(&op).unwrap();
    let x = random(squared.strong_form().unwrap().ncols(), 5);
    let y = op.strong_form().unwrap().matvec(&op.strong_form().unwrap().matvec(&x));
    assert!(rel(&squared.strong_form().unwrap().matvec(&x), &y) < 1e-12);
    assert_eq!(rhs.shape(), (2, 2));
}
