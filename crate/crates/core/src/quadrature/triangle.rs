//! Symmetric quadrature on the reference triangle `(0,0), (1,0), (0,1)`.

use super::gauss::gauss_legendre_unit;
use crate::error::{Error, Result};

/// Highest polynomial degree `gauss_triangle` accepts.
pub const MAX_TRIANGLE_ORDER: usize = 20;

/// Quadrature rule on the reference triangle. Weights sum to its area, 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates `(1-s-t, s, t)` of every point.
    pub fn barycentric(&self) -> Vec<[f64; 3]> {
        self.points
            .iter()
            .map(|&[s, t]| [1.0 - s - t, s, t])
            .collect()
    }
}

// Fully symmetric rules given as orbits in barycentric coordinates with weights
// normalised to unit area.
enum Orbit {
    Centroid(f64),
    /// `(a, a, 1-2a)` and its three permutations.
    Three(f64, f64),
    /// `(a, b, 1-a-b)` and its six permutations.
    Six(f64, f64, f64),
}

fn orbit_rule(degree: usize, orbits: &[Orbit]) -> TriangleRule {
    let mut bary: Vec<([f64; 3], f64)> = Vec::new();
    for orbit in orbits {
        match *orbit {
            Orbit::Centroid(w) => bary.push(([1.0 / 3.0; 3], w)),
            Orbit::Three(a, w) => {
                let c = 1.0 - 2.0 * a;
                bary.push(([a, a, c], w));
                bary.push(([a, c, a], w));
                bary.push(([c, a, a], w));
            }
            Orbit::Six(a, b, w) => {
                let c = 1.0 - a - b;
                for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    bary.push((p, w));
                }
            }
        }
    }
    TriangleRule {
        points: bary.iter().map(|(l, _)| [l[1], l[2]]).collect(),
        weights: bary.iter().map(|(_, w)| 0.5 * w).collect(),
        degree,
    }
}

// Collapsed Gauss product rule averaged over the six affine symmetries of the
// triangle. Positive weights, exact to degree 2n-2.
fn symmetrised_collapsed_rule(degree: usize) -> TriangleRule {
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(6 * n * n);
    let mut weights = Vec::with_capacity(6 * n * n);
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            let s = u;
            let t = v * (1.0 - u);
            let weight = wu * wv * (1.0 - u) / 6.0;
            let l = [1.0 - s - t, s, t];
            for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                points.push([l[p[1]], l[p[2]]]);
                weights.push(weight);
            }
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

/// Symmetric rule exact for polynomials of total degree `order`.
///
/// Orders 1, 2, 4, 5, 6 and 8 use Dunavant's rules; 3 and 7 reuse the next
/// rule up. Orders above 8 use a symmetrised collapsed Gauss rule.
pub fn gauss_triangle(order: usize) -> Result<TriangleRule> {
    use Orbit::*;
    let rule = match order {
        1 => orbit_rule(1, &[Centroid(1.0)]),
        2 => orbit_rule(2, &[Three(1.0 / 6.0, 1.0 / 3.0)]),
        3 | 4 => orbit_rule(
            4,
            &[
                Three(0.445_948_490_915_965, 0.223_381_589_678_011),
                Three(0.091_576_213_509_771, 0.109_951_743_655_322),
            ],
        ),
        5 => orbit_rule(
            5,
            &[
                Centroid(0.225),
                Three(0.470_142_064_105_115, 0.132_394_152_788_506),
                Three(0.101_286_507_323_456, 0.125_939_180_544_827),
            ],
        ),
        6 => orbit_rule(
            6,
            &[
                Three(0.249_286_745_170_910, 0.116_786_275_726_379),
                Three(0.063_089_014_491_502, 0.050_844_906_370_207),
                Six(
                    0.053_145_049_844_817,
                    0.310_352_451_033_784,
                    0.082_851_075_618_374,
                ),
            ],
        ),
        7 | 8 => orbit_rule(
            8,
            &[
                Centroid(0.144_315_607_677_787),
                Three(0.459_292_588_292_723, 0.095_091_634_267_285),
                Three(0.170_569_307_751_760, 0.103_217_370_534_718),
                Three(0.050_547_228_317_031, 0.032_458_497_623_198),
                Six(
                    0.008_394_777_409_958,
                    0.263_112_829_634_638,
                    0.027_230_314_174_435,
                ),
            ],
        ),
        9..=MAX_TRIANGLE_ORDER => symmetrised_collapsed_rule(order),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "triangle quadrature order {order} outside 1..={MAX_TRIANGLE_ORDER}"
            )))
        }
    };
    Ok(rule)
}
