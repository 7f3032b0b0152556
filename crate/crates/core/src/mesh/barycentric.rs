//! Barycentric refinement and the dual grid.

use std::collections::HashMap;

use super::{Point, SurfaceMesh};

/// Barycentric coordinates, relative to the parent triangle, of the three
/// corners of each of the six sub-triangles. Sub-triangle `k` of parent
/// `(v0, v1, v2)` with edge midpoints `m01, m12, m20` and centroid `c` is
/// `(v0,m01,c), (m01,v1,c), (v1,m12,c), (m12,v2,c), (v2,m20,c), (m20,v0,c)`.
pub const SUB_TRIANGLE_CORNERS: [[[f64; 3]; 3]; 6] = {
    const V0: [f64; 3] = [1.0, 0.0, 0.0];
    const V1: [f64; 3] = [0.0, 1.0, 0.0];
    const V2: [f64; 3] = [0.0, 0.0, 1.0];
    const M01: [f64; 3] = [0.5, 0.5, 0.0];
    const M12: [f64; 3] = [0.0, 0.5, 0.5];
    const M20: [f64; 3] = [0.5, 0.0, 0.5];
    const C: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
    [
        [V0, M01, C],
        [M01, V1, C],
        [V1, M12, C],
        [M12, V2, C],
        [V2, M20, C],
        [M20, V0, C],
    ]
};

/// Local parent vertex whose dual cell contains sub-triangle `k`.
pub const SUB_TRIANGLE_OWNER: [usize; 6] = [0, 1, 1, 2, 2, 0];

#[derive(Debug)]
pub struct BarycentricMesh {
    mesh: SurfaceMesh,
    parent_element: Vec<usize>,
    dual_cells: Vec<Vec<usize>>,
}

impl BarycentricMesh {
    /// The refined surface itself.
    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    /// Parent element of each sub-triangle.
    pub fn parent_element(&self, sub: usize) -> usize {
        self.parent_element[sub]
    }

    /// Position `0..6` of a sub-triangle inside its parent.
    pub fn local_index(&self, sub: usize) -> usize {
        sub % 6
    }

    /// Parent vertex whose dual cell contains the sub-triangle.
    pub fn owner_vertex(&self, parent: &SurfaceMesh, sub: usize) -> usize {
        parent.triangles()[self.parent_element[sub]][SUB_TRIANGLE_OWNER[sub % 6]]
    }

    /// Sub-triangles forming the dual cell of each parent vertex, ordered
    /// counterclockwise around the vertex as seen from outside.
    pub fn dual_cells(&self) -> &[Vec<usize>] {
        &self.dual_cells
    }

    pub fn dual_cell_area(&self, vertex: usize) -> f64 {
        self.dual_cells[vertex].iter().map(|&s| self.mesh.area(s)).sum()
    }
}

/// Split every triangle into six through its centroid and edge midpoints.
///
/// Vertex numbering: parent vertices first, then edge midpoints in order of
/// first appearance, then centroids in element order.
pub fn barycentric_refine(parent: &SurfaceMesh) -> BarycentricMesh {
    let pv = parent.vertices();
    let mut vertices: Vec<Point> = pv.to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mids = Vec::with_capacity(parent.element_count());
    for t in parent.triangles() {
        let mut m = [0usize; 3];
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            m[k] = *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(std::array::from_fn(|i| 0.5 * (pv[a][i] + pv[b][i])));
                vertices.len() - 1
            });
        }
        mids.push(m);
    }
    let mut triangles = Vec::with_capacity(6 * parent.element_count());
    let mut parent_element = Vec::with_capacity(6 * parent.element_count());
    for (e, t) in parent.triangles().iter().enumerate() {
        let [a, b, c] = parent.corners(e);
        vertices.push(std::array::from_fn(|i| (a[i] + b[i] + c[i]) / 3.0));
        let centre = vertices.len() - 1;
        let [m01, m12, m20] = mids[e];
        for sub in [
            [t[0], m01, centre],
            [m01, t[1], centre],
            [t[1], m12, centre],
            [m12, t[2], centre],
            [t[2], m20, centre],
            [m20, t[0], centre],
        ] {
            triangles.push(sub);
            parent_element.push(e);
        }
    }
    let mesh = SurfaceMesh::new(vertices, triangles)
        .expect("barycentric refinement of a valid mesh is a valid mesh");

    BarycentricMesh {
        mesh,
        parent_element,
        dual_cells: dual_cell_fans(parent),
    }
}

fn dual_cell_fans(parent: &SurfaceMesh) -> Vec<Vec<usize>> {
    let tris = parent.triangles();
    // Directed edge (a -> b) to the triangle that contains it.
    let mut owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * tris.len());
    for (e, t) in tris.iter().enumerate() {
        for k in 0..3 {
            owner.insert((t[k], t[(k + 1) % 3]), e);
        }
    }
    let incident = parent.vertex_elements();
    let mut cells = Vec::with_capacity(parent.vertex_count());
    for (v, around) in incident.iter().enumerate() {
        let mut fan = Vec::with_capacity(2 * around.len());
        let start = around[0];
        let mut e = start;
        loop {
            let t = tris[e];
            let i = t.iter().position(|&x| x == v).unwrap();
            // Sub-triangles at corner i: first the one along edge (v, next), then
            // the one along edge (prev, v).
            let (first, second) = match i {
                0 => (0, 5),
                1 => (2, 1),
                _ => (4, 3),
            };
            fan.push(6 * e + first);
            fan.push(6 * e + second);
            let prev = t[(i + 2) % 3];
            e = owner[&(v, prev)];
            if e == start {
                break;
            }
        }
        debug_assert_eq!(fan.len(), 2 * around.len());
        cells.push(fan);
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::super::{dot, make_cube, make_sphere, norm, sub};
    use super::*;

    #[test]
    fn six_sub_triangles_per_parent() {
        let cube = make_cube(1.0).unwrap();
        let bary = barycentric_refine(&cube);
        assert_eq!(bary.mesh().element_count(), 72);
        assert_eq!(bary.mesh().euler_characteristic(), 2);
    }

    #[test]
    fn sub_triangle_areas_sum_to_parent_area() {
        for mesh in [make_cube(0.5).unwrap(), make_sphere(2).unwrap()] {
            let bary = barycentric_refine(&mesh);
            for e in 0..mesh.element_count() {
                let sum: f64 = (0..6).map(|k| bary.mesh().area(6 * e + k)).sum();
                assert!((sum - mesh.area(e)).abs() / mesh.area(e) < 1e-12);
            }
        }
    }

    #[test]
    fn dual_cells_partition_the_sub_triangles() {
        let mesh = make_sphere(0).unwrap();
        let bary = barycentric_refine(&mesh);
        assert_eq!(bary.dual_cells().len(), 12);
        let mut seen = vec![0; bary.mesh().element_count()];
        for (v, cell) in bary.dual_cells().iter().enumerate() {
            for &s in cell {
                seen[s] += 1;
                assert_eq!(bary.owner_vertex(&mesh, s), v);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        let total: f64 = (0..12).map(|v| bary.dual_cell_area(v)).sum();
        assert!((total - mesh.total_area()).abs() < 1e-13);
    }

    #[test]
    fn sub_triangle_corners_match_geometry() {
        let mesh = make_sphere(1).unwrap();
        let bary = barycentric_refine(&mesh);
        for s in 0..bary.mesh().element_count() {
            let e = bary.parent_element(s);
            let corners = bary.mesh().corners(s);
            for (k, c) in corners.iter().enumerate() {
                let expected = mesh.point(e, SUB_TRIANGLE_CORNERS[s % 6][k]);
                assert!(norm(sub(*c, expected)) < 1e-15);
            }
            // Orientation is inherited from the parent.
            assert!(dot(bary.mesh().normal(s), mesh.normal(e)) > 0.999);
        }
    }

    #[test]
    fn fans_are_contiguous_and_counterclockwise() {
        let mesh = make_cube(0.5).unwrap();
        let bary = barycentric_refine(&mesh);
        let sub_mesh = bary.mesh();
        for (v, cell) in bary.dual_cells().iter().enumerate() {
            // Consecutive sub-triangles in the fan share an edge through v.
            for k in 0..cell.len() {
                let a = sub_mesh.triangles()[cell[k]];
                let b = sub_mesh.triangles()[cell[(k + 1) % cell.len()]];
                let shared = a.iter().filter(|x| b.contains(x)).count();
                assert_eq!(shared, 2, "vertex {v}");
                // Walking counterclockwise: the edge leaving v in `a` ends where
                // the edge entering v in `b` starts.
                let ia = a.iter().position(|&x| x == v).unwrap();
                let ib = b.iter().position(|&x| x == v).unwrap();
                assert_eq!(a[(ia + 2) % 3], b[(ib + 1) % 3]);
            }
        }
    }

    #[test]
    fn refinement_is_deterministic() {
        let mesh = make_sphere(1).unwrap();
        let a = barycentric_refine(&mesh);
        let b = barycentric_refine(&mesh);
        assert_eq!(a.mesh().triangles(), b.mesh().triangles());
        assert_eq!(a.mesh().vertices(), b.mesh().vertices());
        assert_eq!(a.dual_cells(), b.dual_cells());
    }
}
