use bemalg::quadrature::{singular_pair_rule, PairClass, PairRule};

type P3 = [f64; 3];

fn map(t: [P3; 3], p: [f64; 2]) -> P3 {
    std::array::from_fn(|i| t[0][i] + p[0] * (t[1][i] - t[0][i]) + p[1] * (t[2][i] - t[0][i]))
}

fn dist(a: P3, b: P3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn double_area(t: [P3; 3]) -> f64 {
    let (u, v) = (
        [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]],
        [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]],
    );
    let c = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

fn inverse_distance(rule: &PairRule, tx: [P3; 3], ty: [P3; 3]) -> f64 {
    let jac = double_area(tx) * double_area(ty);
    rule.points_x
        .iter()
        .zip(&rule.points_y)
        .zip(&rule.weights)
        .map(|((px, py), w)| w * jac / dist(map(tx, *px), map(ty, *py)))
        .sum()
}

/// `∫_T ∫_T 1/|x - y|` in closed form from the side lengths.
fn self_interaction(t: [P3; 3]) -> f64 {
    let l = [dist(t[1], t[2]), dist(t[2], t[0]), dist(t[0], t[1])];
    let area = 0.5 * double_area(t);
    let s: f64 = (0..3)
        .map(|i| {
            let (a, b, c) = (l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
            ((a + b).powi(2) - c * c).ln() / a - (b * b - (a - c).powi(2)).ln() / a
        })
        .sum();
    4.0 * area * area / 3.0 * s
}

#[test]
fn identical_pair_matches_closed_form() {
    let triangles = [
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        [[0.2, -0.1, 0.3], [1.1, 0.4, 0.0], [0.1, 0.9, 0.7]],
    ];
    for t in triangles {
        let exact = self_interaction(t);
        let rule = singular_pair_rule(PairClass::Identical, 8).unwrap();
        let got = inverse_distance(&rule, t, t);
        assert!((got - exact).abs() <= 1e-6 * exact, "{got} vs {exact}");
    }
    // Unit right triangle: 1.00306588477318235...
    let unit = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    assert!((self_interaction(unit) - 1.003_065_884_773_182_4).abs() < 1e-14);
}

#[test]
fn edge_pair_converges_monotonically() {
    // Shared edge first, the second triangle folded out of plane.
    let tx = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.9, 0.0]];
    let ty = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.4, -0.6, 0.5]];
    let reference = inverse_distance(&singular_pair_rule(PairClass::SharedEdge, 16).unwrap(), tx, ty);
    let errors: Vec<f64> = [1, 2, 3, 4, 6, 8]
        .iter()
        .map(|&n| (inverse_distance(&singular_pair_rule(PairClass::SharedEdge, n).unwrap(), tx, ty) - reference).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[5] < 1e-8 * reference);
}

#[test]
fn vertex_pair_converges() {
    let tx = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let ty = [[0.0, 0.0, 0.0], [-1.0, 0.2, 0.1], [-0.3, -0.9, 0.0]];
    let a = inverse_distance(&singular_pair_rule(PairClass::SharedVertex, 10).unwrap(), tx, ty);
    let b = inverse_distance(&singular_pair_rule(PairClass::SharedVertex, 16).unwrap(), tx, ty);
    assert!((a - b).abs() < 1e-9 * b);
}
