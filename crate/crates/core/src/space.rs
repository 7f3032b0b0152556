//! Discrete function spaces: dof maps and affine local bases.
//!
//! Every local basis function of every supported space is affine on the
//! elements it is integrated over, so it is stored as its three values at the
//! element corners. Spaces can be integrated either on the primal mesh or on
//! its barycentric refinement; DUAL0 only exists on the latter.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::{
    sub, BarycentricMesh, Point, SurfaceMesh, SUB_TRIANGLE_CORNERS, SUB_TRIANGLE_OWNER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Piecewise constants on primal elements.
    P0,
    /// Continuous piecewise linears on the primal mesh.
    P1,
    /// Discontinuous piecewise linears on the primal mesh.
    DP1,
    /// Constants on the dual cells of the barycentric refinement.
    Dual0,
    /// Continuous primal linears, tabulated on the barycentric refinement.
    BP1,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::P0 => "P0",
            SpaceKind::P1 => "P1",
            SpaceKind::DP1 => "DP1",
            SpaceKind::Dual0 => "DUAL0",
            SpaceKind::BP1 => "BP1",
        }
    }

    /// Parse a kind name with an optional polynomial order, e.g. `"DUAL"`, `"P1"`.
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_uppercase().as_str() {
            "P0" | "DP0" => Ok(SpaceKind::P0),
            "P1" => Ok(SpaceKind::P1),
            "DP1" => Ok(SpaceKind::DP1),
            "DUAL" | "DUAL0" => Ok(SpaceKind::Dual0),
            "BP1" | "B-P1" | "B-P" => Ok(SpaceKind::BP1),
            other => Err(Error::InvalidArgument(format!("unknown space kind '{other}'"))),
        }
    }

    fn order(self) -> usize {
        match self {
            SpaceKind::P0 | SpaceKind::Dual0 => 0,
            _ => 1,
        }
    }

    /// Continuous spaces have tangential surface curls.
    pub fn is_continuous(self) -> bool {
        matches!(self, SpaceKind::P1 | SpaceKind::BP1)
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which triangulation element-pair integration runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Grid {
    Primal,
    Barycentric,
}

/// Local basis functions of a space on every element of a grid.
#[derive(Debug)]
pub(crate) struct LocalTable {
    offsets: Vec<usize>,
    dofs: Vec<usize>,
    values: Vec<[f64; 3]>,
}

impl LocalTable {
    /// `(global dof, corner values)` of the functions supported on `element`.
    pub(crate) fn element(&self, element: usize) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        let range = self.offsets[element]..self.offsets[element + 1];
        self.dofs[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub(crate) fn len(&self, element: usize) -> usize {
        self.offsets[element + 1] - self.offsets[element]
    }

    fn build(elements: usize, mut local: impl FnMut(usize, &mut Vec<(usize, [f64; 3])>)) -> Self {
        let mut table = LocalTable {
            offsets: Vec::with_capacity(elements + 1),
            dofs: Vec::new(),
            values: Vec::new(),
        };
        table.offsets.push(0);
        let mut scratch = Vec::with_capacity(3);
        for e in 0..elements {
            scratch.clear();
            local(e, &mut scratch);
            for &(d, v) in &scratch {
                table.dofs.push(d);
                table.values.push(v);
            }
            table.offsets.push(table.dofs.len());
        }
        table
    }
}

struct Inner {
    kind: SpaceKind,
    mesh: Arc<SurfaceMesh>,
    dofs: usize,
    primal: OnceLock<LocalTable>,
    barycentric: OnceLock<LocalTable>,
}

/// A function space on a mesh. Cloning is cheap; equality is structural
/// (same kind on the same mesh object).
#[derive(Clone)]
pub struct FunctionSpace(Arc<Inner>);

impl fmt::Debug for FunctionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({} dofs)", self.0.kind, self.0.dofs)
    }
}

impl PartialEq for FunctionSpace {
    fn eq(&self, other: &Self) -> bool {
        self.0.kind == other.0.kind && Arc::ptr_eq(&self.0.mesh, &other.0.mesh)
    }
}

impl Eq for FunctionSpace {}

const E0: [f64; 3] = [1.0, 0.0, 0.0];
const E1: [f64; 3] = [0.0, 1.0, 0.0];
const E2: [f64; 3] = [0.0, 0.0, 1.0];
const ONE: [f64; 3] = [1.0; 3];

impl FunctionSpace {
    /// Build a space of the given kind and polynomial order on a primal mesh.
    /// Barycentric kinds refine the mesh internally (cached on the mesh).
    pub fn new(kind: SpaceKind, mesh: &Arc<SurfaceMesh>) -> Self {
        let dofs = match kind {
            SpaceKind::P0 => mesh.element_count(),
            SpaceKind::DP1 => 3 * mesh.element_count(),
            SpaceKind::P1 | SpaceKind::Dual0 | SpaceKind::BP1 => mesh.vertex_count(),
        };
        FunctionSpace(Arc::new(Inner {
            kind,
            mesh: mesh.clone(),
            dofs,
            primal: OnceLock::new(),
            barycentric: OnceLock::new(),
        }))
    }

    /// Like [`FunctionSpace::new`] with an explicit order check; orders above 1
    /// are not implemented.
    pub fn with_order(kind: SpaceKind, order: usize, mesh: &Arc<SurfaceMesh>) -> Result<Self> {
        if order != kind.order() {
            return Err(Error::UnsupportedSpace(format!(
                "{kind} has order {}, requested {order}; only orders 0 and 1 are implemented",
                kind.order()
            )));
        }
        Ok(Self::new(kind, mesh))
    }

    pub fn kind(&self) -> SpaceKind {
        self.0.kind
    }

    pub fn mesh(&self) -> &Arc<SurfaceMesh> {
        &self.0.mesh
    }

    pub fn global_dof_count(&self) -> usize {
        self.0.dofs
    }

    /// Grid on which the space is natively defined.
    pub fn native_grid(&self) -> Grid {
        match self.0.kind {
            SpaceKind::Dual0 | SpaceKind::BP1 => Grid::Barycentric,
            _ => Grid::Primal,
        }
    }

    pub fn supports(&self, grid: Grid) -> bool {
        grid == Grid::Barycentric || self.0.kind != SpaceKind::Dual0
    }

    /// The surface mesh of a grid of this space's mesh.
    pub fn grid_mesh(&self, grid: Grid) -> GridMesh {
        match grid {
            Grid::Primal => GridMesh::Primal(self.0.mesh.clone()),
            Grid::Barycentric => GridMesh::Barycentric(self.0.mesh.barycentric()),
        }
    }

    /// Structural identity key, used to name cached pairings.
    pub(crate) fn key(&self) -> &'static str {
        self.0.kind.name()
    }

    pub(crate) fn same_mesh(&self, other: &FunctionSpace) -> bool {
        Arc::ptr_eq(&self.0.mesh, &other.0.mesh)
    }

    pub(crate) fn table(&self, grid: Grid) -> Result<&LocalTable> {
        match grid {
            Grid::Primal => {
                if !self.supports(Grid::Primal) {
                    return Err(Error::UnsupportedSpace(format!(
                        "{} has no representation on the primal grid",
                        self.0.kind
                    )));
                }
                Ok(self.0.primal.get_or_init(|| self.primal_table()))
            }
            Grid::Barycentric => Ok(self.0.barycentric.get_or_init(|| self.barycentric_table())),
        }
    }

    // Local functions on a primal element as corner values.
    fn primal_locals(&self, e: usize, out: &mut Vec<(usize, [f64; 3])>) {
        let t = self.0.mesh.triangles()[e];
        match self.0.kind {
            SpaceKind::P0 => out.push((e, ONE)),
            SpaceKind::P1 | SpaceKind::BP1 => {
                out.extend([(t[0], E0), (t[1], E1), (t[2], E2)]);
            }
            SpaceKind::DP1 => out.extend([(3 * e, E0), (3 * e + 1, E1), (3 * e + 2, E2)]),
            SpaceKind::Dual0 => unreachable!("DUAL0 has no primal representation"),
        }
    }

    fn primal_table(&self) -> LocalTable {
        LocalTable::build(self.0.mesh.element_count(), |e, out| self.primal_locals(e, out))
    }

    fn barycentric_table(&self) -> LocalTable {
        let mesh = &self.0.mesh;
        let bary = mesh.barycentric();
        let mut parent = Vec::with_capacity(3);
        LocalTable::build(bary.mesh().element_count(), |s, out| {
            let e = bary.parent_element(s);
            let k = s % 6;
            if self.0.kind == SpaceKind::Dual0 {
                out.push((mesh.triangles()[e][SUB_TRIANGLE_OWNER[k]], ONE));
                return;
            }
            // Restrict each parent function to the sub-triangle: an affine
            // function's value at a sub-corner is its parent-barycentric average.
            parent.clear();
            self.primal_locals(e, &mut parent);
            for &(dof, v) in &parent {
                let corners = SUB_TRIANGLE_CORNERS[k];
                let vals = corners.map(|b| b[0] * v[0] + b[1] * v[1] + b[2] * v[2]);
                if vals.iter().any(|&x| x != 0.0) {
                    out.push((dof, vals));
                }
            }
        })
    }

    /// Value of `sum_g c_g phi_g` at a reference point `(s, t)` of an element of
    /// the native grid.
    pub fn evaluate(&self, coefficients: &[c64], element: usize, point: [f64; 2]) -> Result<c64> {
        if coefficients.len() != self.0.dofs {
            return Err(Error::Dimension {
                expected: self.0.dofs,
                actual: coefficients.len(),
            });
        }
        let grid = self.native_grid();
        let elements = self.grid_mesh(grid).mesh().element_count();
        if element >= elements {
            return Err(Error::InvalidArgument(format!(
                "element {element} out of range (grid has {elements})"
            )));
        }
        let [s, t] = point;
        if !(s >= -1e-12 && t >= -1e-12 && s + t <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "reference point ({s}, {t}) lies outside the unit triangle"
            )));
        }
        let lambda = [1.0 - s - t, s, t];
        Ok(self
            .table(grid)?
            .element(element)
            .map(|(dof, v)| coefficients[dof] * (v[0] * lambda[0] + v[1] * lambda[1] + v[2] * lambda[2]))
            .sum())
    }

    /// Cartesian surface curls `nu x grad phi` of the local functions on an
    /// element of the native grid, with their global dofs.
    pub fn surface_curl_components(&self, element: usize) -> Result<Vec<(usize, Point)>> {
        if !matches!(self.0.kind, SpaceKind::P1 | SpaceKind::BP1 | SpaceKind::DP1) {
            return Err(Error::UnsupportedSpace(format!(
                "surface curl is not defined for {}",
                self.0.kind
            )));
        }
        let grid = self.native_grid();
        let gm = self.grid_mesh(grid);
        let mesh = gm.mesh();
        if element >= mesh.element_count() {
            return Err(Error::InvalidArgument(format!("element {element} out of range")));
        }
        let hat = hat_curls(mesh, element);
        Ok(self
            .table(grid)?
            .element(element)
            .map(|(dof, v)| (dof, combine(&hat, v)))
            .collect())
    }

    /// Interpolate a function given pointwise: nodal for the linear kinds,
    /// centroid (P0) or dual-cell centre vertex (DUAL0) values for constants.
    pub fn interpolate(&self, f: impl Fn(Point) -> c64) -> Vec<c64> {
        let mesh = &self.0.mesh;
        match self.0.kind {
            SpaceKind::P0 => (0..mesh.element_count())
                .map(|e| f(mesh.point(e, [1.0 / 3.0; 3])))
                .collect(),
            SpaceKind::P1 | SpaceKind::BP1 | SpaceKind::Dual0 => {
                mesh.vertices().iter().map(|&p| f(p)).collect()
            }
            SpaceKind::DP1 => mesh
                .triangles()
                .iter()
                .flat_map(|t| t.map(|v| f(mesh.vertices()[v])))
                .collect(),
        }
    }
}

/// A grid's surface mesh, either the primal mesh or a barycentric refinement.
#[derive(Clone)]
pub enum GridMesh {
    Primal(Arc<SurfaceMesh>),
    Barycentric(Arc<BarycentricMesh>),
}

impl GridMesh {
    pub fn mesh(&self) -> &SurfaceMesh {
        match self {
            GridMesh::Primal(m) => m,
            GridMesh::Barycentric(b) => b.mesh(),
        }
    }
}

/// Surface curls of the three corner hat functions of a flat element:
/// `curl lambda_k = -(p_{k+2} - p_{k+1}) / (2A)`.
pub(crate) fn hat_curls(mesh: &SurfaceMesh, element: usize) -> [Point; 3] {
    let p = mesh.corners(element);
    let two_area = 2.0 * mesh.area(element);
    std::array::from_fn(|k| {
        let e = sub(p[(k + 2) % 3], p[(k + 1) % 3]);
        [-e[0] / two_area, -e[1] / two_area, -e[2] / two_area]
    })
}

pub(crate) fn combine(hat: &[Point; 3], v: [f64; 3]) -> Point {
    std::array::from_fn(|i| v[0] * hat[0][i] + v[1] * hat[1][i] + v[2] * hat[2][i])
}

/// Grid on which a pairing between two spaces is integrated: barycentric as soon
/// as either side needs it, primal otherwise. BP1 integrates on the primal grid
/// when paired with a primal-representable space, since it spans the same
/// functions as P1.
pub fn common_grid(a: &FunctionSpace, b: &FunctionSpace) -> Result<Grid> {
    if !a.same_mesh(b) {
        return Err(Error::SpaceMismatch(format!(
            "{} and {} live on different meshes",
            a.kind(),
            b.kind()
        )));
    }
    if a.kind() == SpaceKind::Dual0 || b.kind() == SpaceKind::Dual0 {
        Ok(Grid::Barycentric)
    } else {
        Ok(Grid::Primal)
    }
}
