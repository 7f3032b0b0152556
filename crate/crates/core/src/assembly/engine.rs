//! Element-pair integration shared by all dense boundary operators.
//!
//! For every ordered pair of grid elements (test `i`, trial `j`) the engine
//! integrates the kernels against the nine products of corner hat functions
//! `lambda_k(x) lambda_l(y)`. Every local basis function is affine, so operator
//! entries follow by contracting these 3x3 blocks with corner values, and the
//! hypersingular operator reuses the single-layer block with element-constant
//! surface curls. One pass therefore serves V, K, K' and W together.

use faer::Mat;
use rayon::prelude::*;

use super::kernel::Kernel;
use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::{dot, Point, SurfaceMesh};
use crate::quadrature::{gauss_triangle, singular_pair_rule, PairClass, PairRule, QuadratureOrders};
use crate::space::{combine, common_grid, hat_curls, FunctionSpace, LocalTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    SingleLayer,
    DoubleLayer,
    AdjointDoubleLayer,
    Hypersingular,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::SingleLayer => "single_layer",
            OperatorKind::DoubleLayer => "double_layer",
            OperatorKind::AdjointDoubleLayer => "adjoint_double_layer",
            OperatorKind::Hypersingular => "hypersingular",
        }
    }
}

/// One dense weak form to produce: rows are `dual` dofs, columns `domain` dofs.
#[derive(Debug, Clone)]
pub struct Request {
    pub kind: OperatorKind,
    pub domain: FunctionSpace,
    pub dual: FunctionSpace,
}

type Block = [[c64; 3]; 3];
const ZERO_BLOCK: Block = [[c64::new(0.0, 0.0); 3]; 3];

#[derive(Clone, Copy)]
struct Needs {
    single: bool,
    double: bool,
    adjoint: bool,
}

#[derive(Clone, Copy)]
struct Blocks {
    single: Block,
    double: Block,
    adjoint: Block,
}

struct Geometry<'m> {
    mesh: &'m SurfaceMesh,
    corners: Vec<[Point; 3]>,
    normals: Vec<Point>,
    jacobians: Vec<f64>,
    curls: Vec<[Point; 3]>,
    // Regular rule mapped onto every element: points, weights (with Jacobian).
    reg_points: Vec<Point>,
    reg_weights: Vec<f64>,
    reg_lambda: Vec<[f64; 3]>,
}

impl<'m> Geometry<'m> {
    fn new(mesh: &'m SurfaceMesh, order: usize) -> Result<Self> {
        let n = mesh.element_count();
        let rule = gauss_triangle(order)?;
        let lambda = rule.barycentric();
        let mut reg_points = Vec::with_capacity(n * rule.len());
        let mut reg_weights = Vec::with_capacity(n * rule.len());
        let corners: Vec<[Point; 3]> = (0..n).map(|e| mesh.corners(e)).collect();
        let jacobians: Vec<f64> = (0..n).map(|e| 2.0 * mesh.area(e)).collect();
        for e in 0..n {
            for (l, w) in lambda.iter().zip(&rule.weights) {
                reg_points.push(map(&corners[e], *l));
                reg_weights.push(w * jacobians[e]);
            }
        }
        Ok(Geometry {
            mesh,
            normals: (0..n).map(|e| mesh.normal(e)).collect(),
            curls: (0..n).map(|e| hat_curls(mesh, e)).collect(),
            corners,
            jacobians,
            reg_points,
            reg_weights,
            reg_lambda: lambda,
        })
    }
}

#[inline]
fn map(c: &[Point; 3], l: [f64; 3]) -> Point {
    std::array::from_fn(|i| l[0] * c[0][i] + l[1] * c[1][i] + l[2] * c[2][i])
}

struct SingularRules {
    vertex: PairRule,
    edge: PairRule,
    identical: PairRule,
}

impl SingularRules {
    fn get(&self, shared: usize) -> &PairRule {
        match shared {
            1 => &self.vertex,
            2 => &self.edge,
            _ => &self.identical,
        }
    }
}

// Average a coincident-pair rule with its x <-> y reflection.
fn symmetrised(rule: PairRule) -> PairRule {
    let mut out = rule.clone();
    out.points_x.extend_from_slice(&rule.points_y);
    out.points_y.extend_from_slice(&rule.points_x);
    out.weights.extend_from_slice(&rule.weights);
    out.weights.iter_mut().for_each(|w| *w *= 0.5);
    out
}

impl Blocks {
    // Blocks of the pair (j, i) from those of (i, j).
    fn mirror(self) -> Blocks {
        let t = |b: Block| -> Block { std::array::from_fn(|a| std::array::from_fn(|c| b[c][a])) };
        Blocks {
            single: t(self.single),
            double: t(self.adjoint),
            adjoint: t(self.double),
        }
    }
}

/// Vertex orderings that put shared vertices first, identically in both
/// triangles.
fn canonical_orders(ti: [usize; 3], tj: [usize; 3]) -> ([usize; 3], [usize; 3], usize) {
    let mut px = [0usize; 3];
    let mut py = [0usize; 3];
    let mut shared = 0;
    for a in 0..3 {
        if let Some(b) = tj.iter().position(|&v| v == ti[a]) {
            px[shared] = a;
            py[shared] = b;
            shared += 1;
        }
    }
    let mut nx = shared;
    for a in 0..3 {
        if !px[..shared].contains(&a) {
            px[nx] = a;
            nx += 1;
        }
    }
    let mut ny = shared;
    for b in 0..3 {
        if !py[..shared].contains(&b) {
            py[ny] = b;
            ny += 1;
        }
    }
    (px, py, shared)
}

#[inline]
fn kernel_values<const LAPLACE: bool>(k: f64, r: f64) -> (c64, c64) {
    use std::f64::consts::PI;
    let inv = 1.0 / (4.0 * PI * r);
    if LAPLACE {
        (c64::new(inv, 0.0), c64::new(-inv / (r * r), 0.0))
    } else {
        let (s, c) = (k * r).sin_cos();
        let e = c64::new(c, s) * inv;
        (e, e * c64::new(-1.0, k * r) / (r * r))
    }
}

fn regular_blocks<const LAPLACE: bool>(k: f64, g: &Geometry, i: usize, j: usize, needs: Needs) -> Blocks {
    let nq = g.reg_lambda.len();
    let (xi, xw) = (&g.reg_points[i * nq..(i + 1) * nq], &g.reg_weights[i * nq..(i + 1) * nq]);
    let (yj, yw) = (&g.reg_points[j * nq..(j + 1) * nq], &g.reg_weights[j * nq..(j + 1) * nq]);
    let (nx, ny) = (g.normals[i], g.normals[j]);
    let mut out = Blocks {
        single: ZERO_BLOCK,
        double: ZERO_BLOCK,
        adjoint: ZERO_BLOCK,
    };
    for p in 0..nq {
        let x = xi[p];
        // Inner sums over trial points, per trial corner function.
        let mut s = [c64::new(0.0, 0.0); 3];
        let mut d = [c64::new(0.0, 0.0); 3];
        let mut a = [c64::new(0.0, 0.0); 3];
        for q in 0..nq {
            let y = yj[q];
            let diff = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
            let r = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt();
            let (gv, radial) = kernel_values::<LAPLACE>(k, r);
            let w = yw[q];
            let ly = g.reg_lambda[q];
            if needs.single {
                let v = gv * w;
                for l in 0..3 {
                    s[l] += v * ly[l];
                }
            }
            if needs.double {
                let v = radial * (w * (diff[0] * ny[0] + diff[1] * ny[1] + diff[2] * ny[2]));
                for l in 0..3 {
                    d[l] += v * ly[l];
                }
            }
            if needs.adjoint {
                let v = radial * (-w * (diff[0] * nx[0] + diff[1] * nx[1] + diff[2] * nx[2]));
                for l in 0..3 {
                    a[l] += v * ly[l];
                }
            }
        }
        let lx = g.reg_lambda[p];
        for kk in 0..3 {
            let wl = xw[p] * lx[kk];
            for l in 0..3 {
                out.single[kk][l] += s[l] * wl;
                out.double[kk][l] += d[l] * wl;
                out.adjoint[kk][l] += a[l] * wl;
            }
        }
    }
    out
}

fn singular_blocks<const LAPLACE: bool>(
    k: f64,
    g: &Geometry,
    i: usize,
    j: usize,
    px: [usize; 3],
    py: [usize; 3],
    rule: &PairRule,
    needs: Needs,
) -> Blocks {
    let ci = [g.corners[i][px[0]], g.corners[i][px[1]], g.corners[i][px[2]]];
    let cj = [g.corners[j][py[0]], g.corners[j][py[1]], g.corners[j][py[2]]];
    let (nx, ny) = (g.normals[i], g.normals[j]);
    let jac = g.jacobians[i] * g.jacobians[j];
    let mut local = Blocks {
        single: ZERO_BLOCK,
        double: ZERO_BLOCK,
        adjoint: ZERO_BLOCK,
    };
    for q in 0..rule.len() {
        let [s, t] = rule.points_x[q];
        let lx = [1.0 - s - t, s, t];
        let [s, t] = rule.points_y[q];
        let ly = [1.0 - s - t, s, t];
        let x = map(&ci, lx);
        let y = map(&cj, ly);
        let diff = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
        let r = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt();
        let (gv, radial) = kernel_values::<LAPLACE>(k, r);
        let w = rule.weights[q] * jac;
        let vs = gv * w;
        let vd = radial * (w * dot(diff, ny));
        let va = radial * (-w * dot(diff, nx));
        for a in 0..3 {
            for b in 0..3 {
                let l = lx[a] * ly[b];
                if needs.single {
                    local.single[a][b] += vs * l;
                }
                if needs.double {
                    local.double[a][b] += vd * l;
                }
                if needs.adjoint {
                    local.adjoint[a][b] += va * l;
                }
            }
        }
    }
    // Back to the elements' own corner numbering.
    let mut out = Blocks {
        single: ZERO_BLOCK,
        double: ZERO_BLOCK,
        adjoint: ZERO_BLOCK,
    };
    for a in 0..3 {
        for b in 0..3 {
            out.single[px[a]][py[b]] = local.single[a][b];
            out.double[px[a]][py[b]] = local.double[a][b];
            out.adjoint[px[a]][py[b]] = local.adjoint[a][b];
        }
    }
    out
}

struct Prepared<'a> {
    kind: OperatorKind,
    test: &'a LocalTable,
    trial: &'a LocalTable,
    cols: usize,
    rows: usize,
}

/// Assemble several dense weak forms that share a grid in one pass over
/// element pairs.
pub fn assemble_dense(kernel: Kernel, requests: &[Request], orders: QuadratureOrders) -> Result<Vec<Mat<c64>>> {
    let Some(first) = requests.first() else {
        return Ok(Vec::new());
    };
    let grid = common_grid(&first.domain, &first.dual)?;
    for r in requests {
        if common_grid(&r.domain, &r.dual)? != grid || !r.domain.same_mesh(&first.domain) {
            return Err(Error::SpaceMismatch(
                "fused assembly requires all operators on one grid".into(),
            ));
        }
        if r.kind == OperatorKind::Hypersingular
            && !(curl_capable(&r.domain) && curl_capable(&r.dual))
        {
            return Err(Error::UnsupportedSpace(format!(
                "hypersingular operator needs P1, BP1 or DP1 spaces, got {} and {}",
                r.domain.kind(),
                r.dual.kind()
            )));
        }
    }
    let grid_mesh = first.domain.grid_mesh(grid);
    let mesh = grid_mesh.mesh();
    let geometry = Geometry::new(mesh, orders.regular)?;
    let rules = SingularRules {
        vertex: singular_pair_rule(PairClass::SharedVertex, orders.singular)?,
        edge: singular_pair_rule(PairClass::SharedEdge, orders.singular)?,
        identical: symmetrised(singular_pair_rule(PairClass::Identical, orders.singular)?),
    };
    let needs = Needs {
        single: requests
            .iter()
            .any(|r| matches!(r.kind, OperatorKind::SingleLayer | OperatorKind::Hypersingular)),
        double: requests.iter().any(|r| r.kind == OperatorKind::DoubleLayer),
        adjoint: requests.iter().any(|r| r.kind == OperatorKind::AdjointDoubleLayer),
    };
    let prepared: Vec<Prepared> = requests
        .iter()
        .map(|r| {
            Ok(Prepared {
                kind: r.kind,
                test: r.dual.table(grid)?,
                trial: r.domain.table(grid)?,
                cols: r.domain.global_dof_count(),
                rows: r.dual.global_dof_count(),
            })
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<Mat<c64>> = prepared.iter().map(|p| Mat::zeros(p.rows, p.cols)).collect();
    let n = mesh.element_count();
    let k = kernel.wavenumber();
    const CHUNK: usize = 64;
    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let strips: Vec<Vec<Vec<c64>>> = (start..end)
            .into_par_iter()
            .map(|i| {
                if kernel.is_laplace() {
                    strip::<true>(k, &geometry, &rules, &prepared, needs, i)
                } else {
                    strip::<false>(k, &geometry, &rules, &prepared, needs, i)
                }
            })
            .collect();
        for (i, strip) in (start..end).zip(strips) {
            for (r, p) in prepared.iter().enumerate() {
                for (row, (dof, _)) in p.test.element(i).enumerate() {
                    let values = &strip[r][row * p.cols..(row + 1) * p.cols];
                    let mut target = out[r].row_mut(dof);
                    for (c, v) in values.iter().enumerate() {
                        target[c] += *v;
                    }
                }
            }
        }
    }
    for _ in requests {
        first.domain.mesh().counters().record_assembly();
    }
    Ok(out)
}

fn curl_capable(space: &FunctionSpace) -> bool {
    use crate::space::SpaceKind::*;
    matches!(space.kind(), P1 | BP1 | DP1)
}

// Rows of every requested operator contributed by test element `i`.
fn strip<const LAPLACE: bool>(
    k: f64,
    g: &Geometry,
    rules: &SingularRules,
    prepared: &[Prepared],
    needs: Needs,
    i: usize,
) -> Vec<Vec<c64>> {
    let mut strips: Vec<Vec<c64>> = prepared
        .iter()
        .map(|p| vec![c64::new(0.0, 0.0); p.test.len(i) * p.cols])
        .collect();
    let tris = g.mesh.triangles();
    let ti = tris[i];
    let k2 = k * k;
    for j in 0..tris.len() {
        let tj = tris[j];
        let shared = ti.iter().filter(|v| tj.contains(v)).count();
        let blocks = if shared == 0 {
            regular_blocks::<LAPLACE>(k, g, i, j, needs)
        } else if i <= j {
            let (px, py, _) = canonical_orders(ti, tj);
            singular_blocks::<LAPLACE>(k, g, i, j, px, py, rules.get(shared), needs)
        } else {
            // Integrate as the mirrored pair so that (i, j) and (j, i) see the
            // same quadrature points; this keeps V symmetric and K' = K^T.
            let (py, px, _) = canonical_orders(tj, ti);
            let mirrored = Needs {
                double: needs.adjoint,
                adjoint: needs.double,
                ..needs
            };
            singular_blocks::<LAPLACE>(k, g, j, i, py, px, rules.get(shared), mirrored).mirror()
        };
        for (p, strip) in prepared.iter().zip(strips.iter_mut()) {
            let block = match p.kind {
                OperatorKind::SingleLayer | OperatorKind::Hypersingular => &blocks.single,
                OperatorKind::DoubleLayer => &blocks.double,
                OperatorKind::AdjointDoubleLayer => &blocks.adjoint,
            };
            let total: c64 = block.iter().flatten().sum();
            let nu = dot(g.normals[i], g.normals[j]);
            for (row, (_, f)) in p.test.element(i).enumerate() {
                let fb: [c64; 3] =
                    std::array::from_fn(|l| f[0] * block[0][l] + f[1] * block[1][l] + f[2] * block[2][l]);
                let curl_f = combine(&g.curls[i], f);
                let target = &mut strip[row * p.cols..(row + 1) * p.cols];
                for (col, h) in p.trial.element(j) {
                    let mut v = fb[0] * h[0] + fb[1] * h[1] + fb[2] * h[2];
                    if p.kind == OperatorKind::Hypersingular {
                        let curl_h = combine(&g.curls[j], h);
                        v = total * dot(curl_f, curl_h) - v * (k2 * nu);
                    }
                    target[col] += v;
                }
            }
        }
    }
    strips
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_orders_put_shared_vertices_first() {
        let (px, py, n) = canonical_orders([4, 7, 9], [9, 2, 4]);
        assert_eq!(n, 2);
        assert_eq!(px, [0, 2, 1]);
        assert_eq!(py, [2, 0, 1]);
        let (px, py, n) = canonical_orders([1, 2, 3], [3, 1, 2]);
        assert_eq!(n, 3);
        assert_eq!([px[0], px[1], px[2]].map(|a| [1, 2, 3][a]), [py[0], py[1], py[2]].map(|b| [3, 1, 2][b]));
        let (_, _, n) = canonical_orders([1, 2, 3], [4, 5, 6]);
        assert_eq!(n, 0);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        use crate::mesh::make_cube;
        use crate::space::SpaceKind;
        use std::sync::Arc;
        let mesh = Arc::new(make_cube(1.0).unwrap());
        let p1 = FunctionSpace::new(SpaceKind::P1, &mesh);
        let dual = FunctionSpace::new(SpaceKind::Dual0, &mesh);
        let reqs = [
            Request {
                kind: OperatorKind::SingleLayer,
                domain: p1.clone(),
                dual: p1.clone(),
            },
            Request {
                kind: OperatorKind::SingleLayer,
                domain: dual.clone(),
                dual: dual.clone(),
            },
        ];
        assert!(assemble_dense(Kernel::laplace(), &reqs, Default::default()).is_err());
        let bad = [Request {
            kind: OperatorKind::Hypersingular,
            domain: dual.clone(),
            dual,
        }];
        assert!(matches!(
            assemble_dense(Kernel::laplace(), &bad, Default::default()),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    fn sphere(level: usize) -> std::sync::Arc<crate::mesh::SurfaceMesh> {
        std::sync::Arc::new(crate::mesh::make_sphere(level).unwrap())
    }

    fn req(kind: OperatorKind, domain: &FunctionSpace, dual: &FunctionSpace) -> Request {
        Request {
            kind,
            domain: domain.clone(),
            dual: dual.clone(),
        }
    }

    #[test]
    fn sphere_identities_for_constants() {
        use crate::space::SpaceKind;
        let mesh = sphere(2);
        let p0 = FunctionSpace::new(SpaceKind::P0, &mesh);
        let out = assemble_dense(
            Kernel::laplace(),
            &[
                req(OperatorKind::SingleLayer, &p0, &p0),
                req(OperatorKind::DoubleLayer, &p0, &p0),
                req(OperatorKind::AdjointDoubleLayer, &p0, &p0),
            ],
            Default::default(),
        )
        .unwrap();
        let n = p0.global_dof_count();
        let total: c64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| out[0][(i, j)]).sum();
        assert!((total.re / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.05);
        for i in 0..n {
            let row: c64 = (0..n).map(|j| out[1][(i, j)]).sum();
            assert!((row.re / mesh.area(i) + 0.5).abs() < 0.05, "K1 row {i}: {}", row.re / mesh.area(i));
            for j in 0..n {
                assert!((out[1][(i, j)] - out[2][(j, i)]).norm() < 1e-12);
                assert!(out[0][(i, j)].im == 0.0);
            }
        }
        assert_eq!(mesh.counters().assemblies(), 3);
    }

    #[test]
    fn helmholtz_single_layer_is_symmetric() {
        use crate::space::SpaceKind;
        let mesh = sphere(1);
        let p1 = FunctionSpace::new(SpaceKind::P1, &mesh);
        let v = assemble_dense(Kernel::helmholtz(2.0), &[req(OperatorKind::SingleLayer, &p1, &p1)], Default::default())
            .unwrap()
            .remove(0);
        let scale = v.norm_max();
        let asym = (&v - v.transpose()).norm_max();
        assert!(asym < 1e-10 * scale);
    }

    #[test]
    fn laplace_hypersingular_annihilates_constants() {
        use crate::space::SpaceKind;
        let mesh = sphere(1);
        for kind in [SpaceKind::P1, SpaceKind::DP1] {
            let space = FunctionSpace::new(kind, &mesh);
            let w = assemble_dense(Kernel::laplace(), &[req(OperatorKind::Hypersingular, &space, &space)], Default::default())
                .unwrap()
                .remove(0);
            let n = space.global_dof_count();
            for i in 0..n {
                let row: c64 = (0..n).map(|j| w[(i, j)]).sum();
                assert!(row.norm() <= 1e-12 * w.norm_max());
            }
        }
    }

    // Brute-force tensor Gauss over two elements.
    fn tensor_oracle(mesh: &crate::mesh::SurfaceMesh, kernel: Kernel, a: usize, b: usize, order: usize) -> (c64, c64) {
        let rule = gauss_triangle(order).unwrap();
        let lam = rule.barycentric();
        let (mut s, mut d) = (c64::new(0.0, 0.0), c64::new(0.0, 0.0));
        for (lx, wx) in lam.iter().zip(&rule.weights) {
            for (ly, wy) in lam.iter().zip(&rule.weights) {
                let x = mesh.point(a, *lx);
                let y = mesh.point(b, *ly);
                let w = wx * wy * 4.0 * mesh.area(a) * mesh.area(b);
                s += kernel.value(x, y) * w;
                d += kernel.normal_derivative_y(x, y, mesh.normal(b)) * w;
            }
        }
        (s, d)
    }

    #[test]
    fn disjoint_entries_match_tensor_oracle() {
        use crate::space::SpaceKind;
        let mesh = std::sync::Arc::new(crate::mesh::make_cube(0.5).unwrap());
        let p0 = FunctionSpace::new(SpaceKind::P0, &mesh);
        let kernel = Kernel::helmholtz(1.5);
        let reqs = [req(OperatorKind::SingleLayer, &p0, &p0), req(OperatorKind::DoubleLayer, &p0, &p0)];
        let (a, b) = (0, mesh.element_count() - 1);
        assert_eq!(crate::quadrature::classify_pair(&mesh, a, b), PairClass::Disjoint);
        for (order, oracle_order, tol) in [(4, 4, 1e-12), (8, 12, 1e-8)] {
            let orders = QuadratureOrders { regular: order, ..Default::default() };
            let out = assemble_dense(kernel, &reqs, orders).unwrap();
            let (s, d) = tensor_oracle(&mesh, kernel, a, b, oracle_order);
            assert!((out[0][(a, b)] - s).norm() < tol * s.norm(), "order {order}");
            assert!((out[1][(a, b)] - d).norm() < tol * d.norm(), "order {order}");
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        use crate::space::SpaceKind;
        let mesh = sphere(1);
        let p1 = FunctionSpace::new(SpaceKind::P1, &mesh);
        let r = [req(OperatorKind::DoubleLayer, &p1, &p1)];
        let a = assemble_dense(Kernel::helmholtz(1.0), &r, Default::default()).unwrap();
        let b = assemble_dense(Kernel::helmholtz(1.0), &r, Default::default()).unwrap();
        assert!(a[0] == b[0]);
    }
}
