//! Single- and double-layer potentials at points off the surface.

use faer::Mat;
use rayon::prelude::*;

use super::kernel::Kernel;
use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::{point_triangle_distance, Point, SurfaceMesh};
use crate::quadrature::{gauss_triangle, TriangleRule};
use crate::space::{FunctionSpace, Grid, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOptions {
    /// Points closer than `proximity` times the diameter of the nearest
    /// element are rejected.
    pub proximity: f64,
    /// Subdivide an element while the point is closer than this multiple of
    /// the piece's diameter.
    pub near_factor: f64,
    pub max_depth: usize,
    pub order: usize,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        PotentialOptions {
            proximity: 1e-3,
            near_factor: 1.5,
            max_depth: 6,
            order: 6,
        }
    }
}

#[derive(Clone, Copy)]
enum Layer {
    Single,
    Double,
}

/// Matrix mapping coefficients of `space` to `∫ G(x, y) u(y) dy` at `points`.
pub fn potential_single_layer(kernel: Kernel, space: &FunctionSpace, points: &[Point], opts: PotentialOptions) -> Result<Mat<c64>> {
    potential(kernel, space, points, opts, Layer::Single)
}

/// Matrix mapping coefficients of `space` to `∫ dG/dnu(y) u(y) dy` at
/// `points`.
pub fn potential_double_layer(kernel: Kernel, space: &FunctionSpace, points: &[Point], opts: PotentialOptions) -> Result<Mat<c64>> {
    potential(kernel, space, points, opts, Layer::Double)
}

/// Distance from each point to the surface relative to the nearest element's
/// diameter; `Err` names the first point that is too close.
pub fn check_proximity(mesh: &SurfaceMesh, points: &[Point], factor: f64) -> Result<()> {
    for (index, &p) in points.iter().enumerate() {
        let (d, diam) = nearest(mesh, p);
        let limit = factor * diam;
        if d < limit {
            return Err(Error::Proximity {
                index,
                distance: d,
                limit,
            });
        }
    }
    Ok(())
}

fn nearest(mesh: &SurfaceMesh, p: Point) -> (f64, f64) {
    (0..mesh.element_count())
        .map(|e| (point_triangle_distance(p, mesh.corners(e)), mesh.geometry(e).diameter))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

fn potential(kernel: Kernel, space: &FunctionSpace, points: &[Point], opts: PotentialOptions, layer: Layer) -> Result<Mat<c64>> {
    // BP1 spans P1, so the cheaper primal grid serves it.
    let grid = if space.kind() == SpaceKind::Dual0 { Grid::Barycentric } else { Grid::Primal };
    let gm = space.grid_mesh(grid);
    let mesh = gm.mesh();
    check_proximity(space.mesh(), points, opts.proximity)?;
    let table = space.table(grid)?;
    let rule = gauss_triangle(opts.order)?;
    let lambda = rule.barycentric();
    let rows: Vec<Vec<c64>> = points
        .par_iter()
        .map(|&x| {
            let mut row = vec![c64::new(0.0, 0.0); space.global_dof_count()];
            for e in 0..mesh.element_count() {
                let corners = mesh.corners(e);
                let nu = mesh.normal(e);
                let mut acc = [c64::new(0.0, 0.0); 3];
                let ctx = Ctx {
                    kernel,
                    layer,
                    x,
                    corners,
                    nu,
                    rule: &rule,
                    lambda: &lambda,
                    opts,
                };
                ctx.integrate([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 2.0 * mesh.area(e), 0, &mut acc);
                for (dof, v) in table.element(e) {
                    row[dof] += acc[0] * v[0] + acc[1] * v[1] + acc[2] * v[2];
                }
            }
            row
        })
        .collect();
    Ok(Mat::from_fn(points.len(), space.global_dof_count(), |i, j| rows[i][j]))
}

struct Ctx<'a> {
    kernel: Kernel,
    layer: Layer,
    x: Point,
    corners: [Point; 3],
    nu: Point,
    rule: &'a TriangleRule,
    lambda: &'a [[f64; 3]],
    opts: PotentialOptions,
}

fn at(c: &[Point; 3], l: [f64; 3]) -> Point {
    std::array::from_fn(|i| l[0] * c[0][i] + l[1] * c[1][i] + l[2] * c[2][i])
}

fn mid(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| 0.5 * (a[i] + b[i]))
}

impl Ctx<'_> {
    // Integrate the kernel times each corner hat over the piece of the element
    // with parent-barycentric corners `piece` and Jacobian `jac`.
    fn integrate(&self, piece: [[f64; 3]; 3], jac: f64, depth: usize, acc: &mut [c64; 3]) {
        let pts = piece.map(|b| at(&self.corners, b));
        let diam = (0..3)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % 3]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        if depth < self.opts.max_depth && point_triangle_distance(self.x, pts) < self.opts.near_factor * diam {
            let [a, b, c] = piece;
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            for sub in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]] {
                self.integrate(sub, 0.25 * jac, depth + 1, acc);
            }
            return;
        }
        for (l, w) in self.lambda.iter().zip(&self.rule.weights) {
            let lam = at(&piece, *l);
            let y = at(&self.corners, lam);
            let k = match self.layer {
                Layer::Single => self.kernel.value(self.x, y),
                Layer::Double => self.kernel.normal_derivative_y(self.x, y, self.nu),
            } * (w * jac);
            for i in 0..3 {
                acc[i] += k * lam[i];
            }
        }
    }
}
