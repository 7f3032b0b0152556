//! Element-pair rules for Galerkin double integrals.
//!
//! Singular classes use the Sauter-Schwab relative-coordinate transformations on
//! the 4D unit cube. Points are returned in the canonical configuration where the
//! shared vertices of both triangles come first, in the same order.

use super::gauss::gauss_legendre_unit;
use super::triangle::gauss_triangle;
use crate::error::{Error, Result};

/// How two triangles of a mesh touch each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    Disjoint,
    SharedVertex,
    SharedEdge,
    Identical,
}

impl PairClass {
    pub fn from_shared_count(count: usize) -> Self {
        match count {
            0 => PairClass::Disjoint,
            1 => PairClass::SharedVertex,
            2 => PairClass::SharedEdge,
            _ => PairClass::Identical,
        }
    }
}

/// Quadrature rule on the product of two reference triangles.
#[derive(Debug, Clone)]
pub struct PairRule {
    pub class: PairClass,
    pub points_x: Vec<[f64; 2]>,
    pub points_y: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl PairRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Tensor product of two triangle rules, used for disjoint pairs.
    pub fn tensor(order_x: usize, order_y: usize) -> Result<Self> {
        let rx = gauss_triangle(order_x)?;
        let ry = gauss_triangle(order_y)?;
        let mut rule = PairRule {
            class: PairClass::Disjoint,
            points_x: Vec::with_capacity(rx.len() * ry.len()),
            points_y: Vec::with_capacity(rx.len() * ry.len()),
            weights: Vec::with_capacity(rx.len() * ry.len()),
        };
        for (px, wx) in rx.points.iter().zip(&rx.weights) {
            for (py, wy) in ry.points.iter().zip(&ry.weights) {
                rule.points_x.push(*px);
                rule.points_y.push(*py);
                rule.weights.push(wx * wy);
            }
        }
        Ok(rule)
    }
}

/// Highest number of Gauss points per cube dimension accepted for singular rules.
pub const MAX_SINGULAR_ORDER: usize = 16;

// A point of the Sauter-Schwab reference triangle {0 <= x2 <= x1 <= 1} mapped to
// standard reference coordinates (s, t) = (x1 - x2, x2).
fn to_reference(x1: f64, x2: f64) -> [f64; 2] {
    [x1 - x2, x2]
}

type Region = fn(f64, f64, f64, f64) -> ([f64; 2], [f64; 2], f64);

// Identical panels: six regions, Jacobian xi^3 eta1^2 eta2.
const IDENTICAL: [Region; 6] = [
    |xi, e1, e2, e3| {
        let x = (xi, xi * (1.0 - e1 + e1 * e2));
        let y = (xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1));
        let y = (xi, xi * (1.0 - e1 + e1 * e2));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi, xi * e1 * (1.0 - e2 + e2 * e3));
        let y = (xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2));
        let y = (xi, xi * e1 * (1.0 - e2 + e2 * e3));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3));
        let y = (xi, xi * e1 * (1.0 - e2));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi, xi * e1 * (1.0 - e2));
        let y = (xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
];

// Shared edge along x2 = 0 of both panels: five regions.
const EDGE: [Region; 5] = [
    |xi, e1, e2, e3| {
        let x = (xi, xi * e1 * e3);
        let y = (xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1)
    },
    |xi, e1, e2, e3| {
        let x = (xi, xi * e1);
        let y = (xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3));
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2));
        let y = (xi, xi * e1 * e2 * e3);
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3));
        let y = (xi, xi * e1);
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3));
        let y = (xi, xi * e1 * e2);
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e1 * e1 * e2)
    },
];

// Shared vertex at the origin of both panels: two regions.
const VERTEX: [Region; 2] = [
    |xi, e1, e2, e3| {
        let x = (xi, xi * e1);
        let y = (xi * e2, xi * e2 * e3);
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e2)
    },
    |xi, e1, e2, e3| {
        let x = (xi * e2, xi * e2 * e3);
        let y = (xi, xi * e1);
        (to_reference(x.0, x.1), to_reference(y.0, y.1), xi.powi(3) * e2)
    },
];

/// Regularising rule for a singular pair class with `order` Gauss points per
/// dimension of the 4D cube.
pub fn singular_pair_rule(class: PairClass, order: usize) -> Result<PairRule> {
    if !(1..=MAX_SINGULAR_ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "singular quadrature order {order} outside 1..={MAX_SINGULAR_ORDER}"
        )));
    }
    let regions: &[Region] = match class {
        PairClass::Identical => &IDENTICAL,
        PairClass::SharedEdge => &EDGE,
        PairClass::SharedVertex => &VERTEX,
        PairClass::Disjoint => {
            return Err(Error::InvalidArgument(
                "disjoint pairs use the tensor rule, not a singular rule".into(),
            ))
        }
    };
    let (g, w) = gauss_legendre_unit(order);
    let n = regions.len() * order.pow(4);
    let mut rule = PairRule {
        class,
        points_x: Vec::with_capacity(n),
        points_y: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
    };
    for region in regions {
        for (&xi, &w0) in g.iter().zip(&w) {
            for (&e1, &w1) in g.iter().zip(&w) {
                for (&e2, &w2) in g.iter().zip(&w) {
                    for (&e3, &w3) in g.iter().zip(&w) {
                        let (x, y, jac) = region(xi, e1, e2, e3);
                        rule.points_x.push(x);
                        rule.points_y.push(y);
                        rule.weights.push(w0 * w1 * w2 * w3 * jac);
                    }
                }
            }
        }
    }
    Ok(rule)
}
