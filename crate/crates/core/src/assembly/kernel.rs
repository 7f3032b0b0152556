//! Laplace and Helmholtz Green's functions.

use std::f64::consts::PI;

use crate::c64;
use crate::mesh::Point;

/// `G(x, y) = exp(ik|x-y|) / (4 pi |x-y|)`; `k = 0` is Laplace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    k: f64,
}

impl Kernel {
    pub fn laplace() -> Self {
        Kernel { k: 0.0 }
    }

    pub fn helmholtz(k: f64) -> Self {
        assert!(k >= 0.0 && k.is_finite(), "wavenumber must be finite and non-negative");
        Kernel { k }
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn is_laplace(&self) -> bool {
        self.k == 0.0
    }

    /// `G` at distance `r`.
    #[inline]
    pub fn value_at(&self, r: f64) -> c64 {
        let (s, c) = (self.k * r).sin_cos();
        c64::new(c, s) / (4.0 * PI * r)
    }

    /// `G'(r) / r`, so that `grad_y G = G'(r)/r (y - x)`.
    #[inline]
    pub fn radial_at(&self, r: f64) -> c64 {
        let (s, c) = (self.k * r).sin_cos();
        c64::new(c, s) * c64::new(-1.0, self.k * r) / (4.0 * PI * r * r * r)
    }

    pub fn value(&self, x: Point, y: Point) -> c64 {
        self.value_at(distance(x, y))
    }

    /// `dG/dnu(y) = grad_y G . nu_y`.
    pub fn normal_derivative_y(&self, x: Point, y: Point, nu_y: Point) -> c64 {
        let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
        let r = distance(x, y);
        self.radial_at(r) * (d[0] * nu_y[0] + d[1] * nu_y[1] + d[2] * nu_y[2])
    }

    /// `dG/dnu(x) = grad_x G . nu_x`.
    pub fn normal_derivative_x(&self, x: Point, y: Point, nu_x: Point) -> c64 {
        let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        let r = distance(x, y);
        self.radial_at(r) * (d[0] * nu_x[0] + d[1] * nu_x[1] + d[2] * nu_x[2])
    }
}

#[inline]
fn distance(x: Point, y: Point) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_is_real_positive_and_symmetric() {
        let g = Kernel::laplace();
        let (x, y) = ([0.1, 0.2, 0.3], [1.0, -0.5, 0.25]);
        let v = g.value(x, y);
        assert!(v.im == 0.0 && v.re > 0.0);
        assert_eq!(v, g.value(y, x));
    }

    #[test]
    fn normal_derivative_matches_finite_difference() {
        let g = Kernel::helmholtz(3.0);
        let (x, y) = ([0.1, 0.2, 0.3], [1.0, -0.5, 0.25]);
        let nu = [0.0, 0.6, 0.8];
        let h = 1e-6;
        let yp = [y[0] + h * nu[0], y[1] + h * nu[1], y[2] + h * nu[2]];
        let ym = [y[0] - h * nu[0], y[1] - h * nu[1], y[2] - h * nu[2]];
        let fd = (g.value(x, yp) - g.value(x, ym)) / (2.0 * h);
        assert!((fd - g.normal_derivative_y(x, y, nu)).norm() < 1e-8);
        let xp = [x[0] + h * nu[0], x[1] + h * nu[1], x[2] + h * nu[2]];
        let xm = [x[0] - h * nu[0], x[1] - h * nu[1], x[2] - h * nu[2]];
        let fd = (g.value(xp, y) - g.value(xm, y)) / (2.0 * h);
        assert!((fd - g.normal_derivative_x(x, y, nu)).norm() < 1e-8);
    }
}
