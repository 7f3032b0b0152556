//! Closed, flat-triangle surface meshes.
//!
//! A [`SurfaceMesh`] is immutable once built. Construction validates that the
//! triangles form a closed, consistently oriented 2-manifold with outward normals
//! and positive element areas.

mod barycentric;
mod gmsh;
mod shapes;

pub use barycentric::{
    barycentric_refine, BarycentricMesh, SUB_TRIANGLE_CORNERS, SUB_TRIANGLE_OWNER,
};
pub use gmsh::{load_msh, read_msh, save_msh, write_msh};
pub use shapes::{make_cube, make_sphere, MAX_SPHERE_LEVEL};

use std::any::Any;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

/// Cached per-element geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    /// Unit outward normal.
    pub normal: Point,
    /// Longest edge.
    pub diameter: f64,
}

/// Instrumentation for the caching contract of operators built on a mesh.
#[derive(Debug, Default)]
pub struct Counters {
    assemblies: AtomicUsize,
    factorizations: AtomicUsize,
}

impl Counters {
    /// Number of elementary operator assemblies performed on this mesh.
    pub fn assemblies(&self) -> usize {
        self.assemblies.load(Ordering::SeqCst)
    }

    /// Number of pairing mass matrix factorizations performed on this mesh.
    pub fn factorizations(&self) -> usize {
        self.factorizations.load(Ordering::SeqCst)
    }

    pub(crate) fn record_assembly(&self) {
        self.assemblies.fetch_add(1, Ordering::SeqCst);
    }

    pub(crate) fn record_factorization(&self) {
        self.factorizations.fetch_add(1, Ordering::SeqCst);
    }
}

type Shared = Arc<dyn Any + Send + Sync>;

// Per-mesh memo table for objects owned by higher layers (mass factorizations),
// so that structurally equal spaces share them.
#[derive(Default)]
struct Memo(Mutex<HashMap<String, Shared>>);

impl std::fmt::Debug for Memo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let len = self.0.lock().map(|m| m.len()).unwrap_or(0);
        write!(f, "Memo({len} entries)")
    }
}

#[derive(Debug)]
pub struct SurfaceMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    geometry: Vec<ElementGeometry>,
    edge_count: usize,
    barycentric: OnceLock<Arc<BarycentricMesh>>,
    counters: Counters,
    memo: Memo,
}

impl SurfaceMesh {
    /// Build and validate a mesh. Triangles must be counterclockwise seen from
    /// outside.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Degenerate("mesh has no triangles".into()));
        }
        let mut referenced = vec![false; vertices.len()];
        for (e, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::Degenerate(format!(
                        "triangle {e} references vertex {v} but there are {} vertices",
                        vertices.len()
                    )));
                }
                referenced[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Degenerate(format!("triangle {e} repeats a vertex")));
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::Degenerate(format!("vertex {v} is not used by any triangle")));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("non-finite vertex coordinate".into()));
        }

        let edge_count = check_manifold(&triangles)?;

        let geometry: Vec<ElementGeometry> = triangles
            .iter()
            .map(|t| element_geometry(&vertices, t))
            .collect();
        if let Some(e) = geometry.iter().position(|g| !(g.area > 0.0)) {
            return Err(Error::Degenerate(format!("triangle {e} has zero area")));
        }

        let mesh = Self {
            vertices,
            triangles,
            geometry,
            edge_count,
            barycentric: OnceLock::new(),
            counters: Counters::default(),
            memo: Memo::default(),
        };
        let volume = mesh.signed_volume();
        if !(volume > 0.0) {
            return Err(Error::NonManifold(format!(
                "signed volume {volume:e} is not positive; normals must point outwards"
            )));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn element_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count as i64 + self.element_count() as i64
    }

    pub fn geometry(&self, element: usize) -> &ElementGeometry {
        &self.geometry[element]
    }

    pub fn area(&self, element: usize) -> f64 {
        self.geometry[element].area
    }

    pub fn normal(&self, element: usize) -> Point {
        self.geometry[element].normal
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Corner coordinates of an element.
    pub fn corners(&self, element: usize) -> [Point; 3] {
        let t = self.triangles[element];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Map barycentric coordinates on an element to a point in space.
    pub fn point(&self, element: usize, bary: [f64; 3]) -> Point {
        let [a, b, c] = self.corners(element);
        std::array::from_fn(|i| bary[0] * a[i] + bary[1] * b[i] + bary[2] * c[i])
    }

    /// Enclosed volume by the divergence theorem; positive for outward normals.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Triangles incident to each vertex, in element order.
    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (e, t) in self.triangles.iter().enumerate() {
            for &v in t {
                adj[v].push(e);
            }
        }
        adj
    }

    /// Barycentric refinement, built on first use and shared afterwards.
    pub fn barycentric(&self) -> Arc<BarycentricMesh> {
        self.barycentric
            .get_or_init(|| Arc::new(barycentric_refine(self)))
            .clone()
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Shared slot for `key`, created by `init` on first request. The slot is
    /// handed out before it is filled so callers can initialise it outside
    /// the table lock.
    pub(crate) fn memo<T: Any + Send + Sync>(&self, key: &str, init: impl FnOnce() -> T) -> Arc<T> {
        let mut table = self.memo.0.lock().unwrap_or_else(|p| p.into_inner());
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| Arc::new(init()) as Shared)
            .clone();
        drop(table);
        entry
            .downcast::<T>()
            .unwrap_or_else(|_| panic!("memo slot {key} holds a different type"))
    }

    /// Distance from a point to the closest point of the surface.
    pub fn distance_to(&self, p: Point) -> f64 {
        (0..self.element_count())
            .map(|e| point_triangle_distance(p, self.corners(e)))
            .fold(f64::INFINITY, f64::min)
    }
}

fn element_geometry(vertices: &[Point], t: &[usize; 3]) -> ElementGeometry {
    let [a, b, c] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
    let n = cross(sub(b, a), sub(c, a));
    let len = norm(n);
    ElementGeometry {
        area: 0.5 * len,
        normal: [n[0] / len, n[1] / len, n[2] / len],
        diameter: norm(sub(b, a)).max(norm(sub(c, b))).max(norm(sub(a, c))),
    }
}

// Every undirected edge must be used by exactly two triangles, once in each
// direction. Returns the number of edges.
fn check_manifold(triangles: &[[usize; 3]]) -> Result<usize> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
    let mut undirected: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len() / 2);
    for (e, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if let Some(other) = directed.insert((a, b), e) {
                return Err(Error::NonManifold(format!(
                    "edge ({a}, {b}) has the same direction in triangles {other} and {e}; orientation is inconsistent or the edge is shared by more than two triangles"
                )));
            }
            *undirected.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    for (&(a, b), &count) in &undirected {
        if count != 2 {
            return Err(Error::NonManifold(format!(
                "edge ({a}, {b}) is shared by {count} triangles"
            )));
        }
    }
    Ok(undirected.len())
}

/// Euclidean distance from `p` to a triangle.
pub fn point_triangle_distance(p: Point, tri: [Point; 3]) -> f64 {
    let [a, b, c] = tri;
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    let closest = if d1 <= 0.0 && d2 <= 0.0 {
        a
    } else {
        let bp = sub(p, b);
        let d3 = dot(ab, bp);
        let d4 = dot(ac, bp);
        if d3 >= 0.0 && d4 <= d3 {
            b
        } else {
            let vc = d1 * d4 - d3 * d2;
            if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
                let v = d1 / (d1 - d3);
                [a[0] + v * ab[0], a[1] + v * ab[1], a[2] + v * ab[2]]
            } else {
                let cp = sub(p, c);
                let d5 = dot(ab, cp);
                let d6 = dot(ac, cp);
                if d6 >= 0.0 && d5 <= d6 {
                    c
                } else {
                    let vb = d5 * d2 - d1 * d6;
                    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
                        let w = d2 / (d2 - d6);
                        [a[0] + w * ac[0], a[1] + w * ac[1], a[2] + w * ac[2]]
                    } else {
                        let va = d3 * d6 - d5 * d4;
                        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
                            let bc = sub(c, b);
                            let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
                            [b[0] + w * bc[0], b[1] + w * bc[1], b[2] + w * bc[2]]
                        } else {
                            let denom = 1.0 / (va + vb + vc);
                            let v = vb * denom;
                            let w = vc * denom;
                            std::array::from_fn(|i| a[i] + ab[i] * v + ac[i] * w)
                        }
                    }
                }
            }
        }
    };
    norm(sub(p, closest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetrahedron() -> (Vec<Point>, Vec<[usize; 3]>) {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let t = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        (v, t)
    }

    #[test]
    fn tetrahedron_is_valid() {
        let (v, t) = tetrahedron();
        let mesh = SurfaceMesh::new(v, t).unwrap();
        assert_eq!(mesh.edge_count(), 6);
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!((mesh.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(mesh.normal(0), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn inward_orientation_is_rejected() {
        let (v, t) = tetrahedron();
        let flipped = t.iter().map(|t| [t[0], t[2], t[1]]).collect();
        assert!(matches!(SurfaceMesh::new(v, flipped), Err(Error::NonManifold(_))));
    }

    #[test]
    fn inconsistent_orientation_is_rejected() {
        let (v, mut t) = tetrahedron();
        t[0] = [0, 1, 2];
        assert!(matches!(SurfaceMesh::new(v, t), Err(Error::NonManifold(_))));
    }

    #[test]
    fn open_surface_is_rejected() {
        let (v, mut t) = tetrahedron();
        t.pop();
        assert!(SurfaceMesh::new(v, t).is_err());
    }

    #[test]
    fn unused_vertex_is_rejected() {
        let (mut v, t) = tetrahedron();
        v.push([5.0, 5.0, 5.0]);
        assert!(matches!(SurfaceMesh::new(v, t), Err(Error::Degenerate(_))));
    }

    #[test]
    fn point_triangle_distance_regions() {
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!((point_triangle_distance([0.2, 0.2, 0.5], tri) - 0.5).abs() < 1e-15);
        assert!((point_triangle_distance([-1.0, -1.0, 0.0], tri) - 2f64.sqrt()).abs() < 1e-15);
        assert!((point_triangle_distance([0.5, -2.0, 0.0], tri) - 2.0).abs() < 1e-15);
        let d = point_triangle_distance([1.0, 1.0, 0.0], tri);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(point_triangle_distance([0.1, 0.1, 0.0], tri), 0.0);
    }
}
