//! Built-in genus-0 shapes: icosahedral unit sphere and structured unit cube.

use std::collections::HashMap;

use super::{cross, dot, norm, sub, Point, SurfaceMesh};
use crate::error::{Error, Result};

/// Highest sphere refinement level (20 * 4^7 = 327680 triangles).
pub const MAX_SPHERE_LEVEL: usize = 7;

fn normalize(p: Point) -> Point {
    let n = norm(p);
    [p[0] / n, p[1] / n, p[2] / n]
}

fn icosahedron() -> (Vec<Point>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices = Vec::with_capacity(12);
    for &a in &[-1.0, 1.0] {
        for &b in &[-phi, phi] {
            vertices.push([0.0, a, b]);
            vertices.push([a, b, 0.0]);
            vertices.push([b, 0.0, a]);
        }
    }
    // Faces are the vertex triples at mutual edge distance 2.
    let edge = |i: usize, j: usize| (norm(sub(vertices[i], vertices[j])) - 2.0).abs() < 1e-9;
    let mut triangles = Vec::with_capacity(20);
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if edge(i, j) && edge(j, k) && edge(i, k) {
                    let n = cross(sub(vertices[j], vertices[i]), sub(vertices[k], vertices[i]));
                    if dot(n, vertices[i]) > 0.0 {
                        triangles.push([i, j, k]);
                    } else {
                        triangles.push([i, k, j]);
                    }
                }
            }
        }
    }
    (vertices.into_iter().map(normalize).collect(), triangles)
}

/// Unit sphere: an icosahedron subdivided `level` times with vertices projected
/// onto the sphere.
pub fn make_sphere(level: usize) -> Result<SurfaceMesh> {
    if level > MAX_SPHERE_LEVEL {
        return Err(Error::Capacity(format!(
            "sphere level {level} exceeds the cap of {MAX_SPHERE_LEVEL}"
        )));
    }
    let (mut vertices, mut triangles) = icosahedron();
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(4 * triangles.len());
        for t in &triangles {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    vertices.push(normalize([
                        0.5 * (pa[0] + pb[0]),
                        0.5 * (pa[1] + pb[1]),
                        0.5 * (pa[2] + pb[2]),
                    ]));
                    vertices.len() - 1
                });
            }
            refined.push([t[0], mid[0], mid[2]]);
            refined.push([mid[0], t[1], mid[1]]);
            refined.push([mid[2], mid[1], t[2]]);
            refined.push([mid[0], mid[1], mid[2]]);
        }
        triangles = refined;
    }
    SurfaceMesh::new(vertices, triangles)
}

/// Unit cube `[0,1]^3` with `n = ceil(1/h)` squares per edge and two triangles
/// per square.
pub fn make_cube(h: f64) -> Result<SurfaceMesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("cube element size h = {h} must be positive")));
    }
    if h > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "cube element size h = {h} exceeds the unit edge length"
        )));
    }
    let n = ((1.0 / h) - 1e-9).ceil().max(1.0) as usize;
    if 12 * n * n > 4_000_000 {
        return Err(Error::Capacity(format!("cube with h = {h} has too many elements")));
    }

    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut triangles = Vec::with_capacity(12 * n * n);
    let mut vertex = |lattice: [usize; 3]| -> usize {
        *index.entry(lattice).or_insert_with(|| {
            vertices.push(lattice.map(|i| i as f64 / n as f64));
            vertices.len() - 1
        })
    };

    // (fixed axis, fixed value, in-plane axes u, v) with u x v pointing outwards.
    let faces = [
        (2, 0, 1, 0),
        (2, n, 0, 1),
        (1, 0, 0, 2),
        (1, n, 2, 0),
        (0, 0, 2, 1),
        (0, n, 1, 2),
    ];
    for &(axis, value, u, v) in &faces {
        let lattice = |i: usize, j: usize| {
            let mut p = [0usize; 3];
            p[axis] = value;
            p[u] = i;
            p[v] = j;
            p
        };
        for j in 0..n {
            for i in 0..n {
                let a = vertex(lattice(i, j));
                let b = vertex(lattice(i + 1, j));
                let c = vertex(lattice(i + 1, j + 1));
                let d = vertex(lattice(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(mesh: &SurfaceMesh) {
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.signed_volume() > 0.0);
        assert!((0..mesh.element_count()).all(|e| mesh.area(e) > 0.0));
    }

    #[test]
    fn icosahedron_combinatorics() {
        let mesh = make_sphere(0).unwrap();
        assert_eq!(mesh.vertex_count(), 12);
        assert_eq!(mesh.element_count(), 20);
        assert_eq!(mesh.edge_count(), 30);
        check_invariants(&mesh);
    }

    #[test]
    fn sphere_levels() {
        for level in 0..=3 {
            let mesh = make_sphere(level).unwrap();
            assert_eq!(mesh.element_count(), 20 * 4usize.pow(level as u32));
            check_invariants(&mesh);
            for v in mesh.vertices() {
                assert!((norm(*v) - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(make_sphere(2).unwrap().element_count(), 320);
    }

    #[test]
    fn sphere_area_converges() {
        // Inscribed polyhedron area, summed element by element.
        let four_pi = 4.0 * std::f64::consts::PI;
        let a2 = make_sphere(2).unwrap().total_area();
        let a3 = make_sphere(3).unwrap().total_area();
        assert!(a2 < a3 && a3 < four_pi);
        assert!((a3 - four_pi).abs() / four_pi < 0.01);
    }

    #[test]
    fn sphere_level_cap() {
        assert!(matches!(make_sphere(MAX_SPHERE_LEVEL + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn cube_counts() {
        let m1 = make_cube(1.0).unwrap();
        assert_eq!((m1.element_count(), m1.vertex_count()), (12, 8));
        check_invariants(&m1);

        let m2 = make_cube(0.5).unwrap();
        assert_eq!((m2.element_count(), m2.vertex_count()), (48, 26));
        check_invariants(&m2);

        let m10 = make_cube(0.1).unwrap();
        assert_eq!((m10.element_count(), m10.vertex_count()), (1200, 602));
        assert!((m10.signed_volume() - 1.0).abs() < 1e-12);
        assert!((m10.total_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn cube_normals_point_out_of_their_face() {
        let mesh = make_cube(0.25).unwrap();
        for e in 0..mesh.element_count() {
            let c = mesh.point(e, [1.0 / 3.0; 3]);
            let n = mesh.normal(e);
            let outward = [c[0] - 0.5, c[1] - 0.5, c[2] - 0.5];
            assert!(dot(n, outward) > 0.0);
        }
    }

    #[test]
    fn cube_rejects_bad_sizes() {
        assert!(make_cube(0.0).is_err());
        assert!(make_cube(-0.5).is_err());
        assert!(make_cube(f64::NAN).is_err());
    }
}
