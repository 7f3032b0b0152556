//! Functions on a space, held either as coefficients or as projections
//! against a dual space.

use std::fmt;
use std::sync::OnceLock;

use super::mass::{mass_factor, mass_matrix};
use super::operator::BoundaryOperator;
use crate::c64;
use crate::error::{Error, Result};
use crate::space::FunctionSpace;

#[derive(Clone)]
enum Repr {
    Coefficients(Vec<c64>),
    Projections { dual: FunctionSpace, values: Vec<c64> },
}

#[derive(Clone)]
pub struct GridFunction {
    space: FunctionSpace,
    repr: Repr,
    coefficients: OnceLock<Result<Vec<c64>>>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Coefficients(_) => write!(f, "GridFunction({:?}, coefficients)", self.space),
            Repr::Projections { dual, .. } => write!(f, "GridFunction({:?}, projections on {:?})", self.space, dual),
        }
    }
}

impl GridFunction {
    pub fn from_coefficients(space: &FunctionSpace, coefficients: Vec<c64>) -> Result<Self> {
        if coefficients.len() != space.global_dof_count() {
            return Err(Error::Dimension {
                expected: space.global_dof_count(),
                actual: coefficients.len(),
            });
        }
        Ok(GridFunction {
            space: space.clone(),
            repr: Repr::Coefficients(coefficients),
            coefficients: OnceLock::new(),
        })
    }

    pub fn from_projections(space: &FunctionSpace, dual: &FunctionSpace, projections: Vec<c64>) -> Result<Self> {
        if projections.len() != dual.global_dof_count() {
            return Err(Error::Dimension {
                expected: dual.global_dof_count(),
                actual: projections.len(),
            });
        }
        if !space.same_mesh(dual) {
            return Err(Error::SpaceMismatch("function and dual space live on different meshes".into()));
        }
        Ok(GridFunction {
            space: space.clone(),
            repr: Repr::Projections {
                dual: dual.clone(),
                values: projections,
            },
            coefficients: OnceLock::new(),
        })
    }

    /// L^2 projection of a pointwise function, stored as projections on
    /// `dual` and evaluated by quadrature on the pairing grid.
    pub fn project(space: &FunctionSpace, dual: &FunctionSpace, f: impl Fn(crate::mesh::Point) -> c64) -> Result<Self> {
        let values = crate::assembly::project_function(dual, &f)?;
        Self::from_projections(space, dual, values)
    }

    /// As [`GridFunction::project`] for `f(x, normal)`.
    pub fn project_with_normal(
        space: &FunctionSpace,
        dual: &FunctionSpace,
        f: impl Fn(crate::mesh::Point, crate::mesh::Point) -> c64,
    ) -> Result<Self> {
        let values = crate::assembly::project_function_with_normal(dual, &f)?;
        Self::from_projections(space, dual, values)
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    /// Stored coefficients, or the solution of `M x = p` for the stored
    /// projections; rectangular pairings cannot be converted.
    pub fn coefficients(&self) -> Result<Vec<c64>> {
        match &self.repr {
            Repr::Coefficients(c) => Ok(c.clone()),
            Repr::Projections { dual, values } => self
                .coefficients
                .get_or_init(|| Ok(mass_factor(&self.space, dual)?.solve(values)))
                .clone(),
        }
    }

    pub fn projections(&self, dual: &FunctionSpace) -> Result<Vec<c64>> {
        if let Repr::Projections { dual: stored, values } = &self.repr {
            if stored == dual {
                return Ok(values.clone());
            }
        }
        let c = self.coefficients()?;
        Ok(mass_matrix(&self.space, dual)?.matvec(&c))
    }

    /// `sqrt(c^H M c)`.
    pub fn l2_norm(&self) -> Result<f64> {
        let c = self.coefficients()?;
        let mc = mass_matrix(&self.space, &self.space)?.matvec(&c);
        Ok(c.iter().zip(&mc).map(|(a, b)| (a.conj() * b).re).sum::<f64>().max(0.0).sqrt())
    }

    pub fn sum(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(other, c64::new(1.0, 0.0))
    }

    pub fn difference(&self, other: &GridFunction) -> Result<GridFunction> {
        self.combine(other, c64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &GridFunction, beta: c64) -> Result<GridFunction> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", self.space, other.space)));
        }
        let (a, b) = (self.coefficients()?, other.coefficients()?);
        Self::from_coefficients(&self.space, a.iter().zip(&b).map(|(x, y)| x + beta * y).collect())
    }

    pub fn scale(&self, alpha: c64) -> Result<GridFunction> {
        Self::from_coefficients(&self.space, self.coefficients()?.iter().map(|x| alpha * x).collect())
    }
}

/// `op(f)`, returned as projections against the operator's dual space.
pub fn apply(op: &BoundaryOperator, f: &GridFunction) -> Result<GridFunction> {
    if f.space() != op.domain() {
        return Err(Error::SpaceMismatch(format!(
            "function lives in {:?}, operator domain is {:?}",
            f.space(),
            op.domain()
        )));
    }
    let p = op.weak_form()?.matvec(&f.coefficients()?);
    GridFunction::from_projections(op.range(), op.dual_to_range(), p)
}
