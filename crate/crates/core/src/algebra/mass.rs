//! Pairing mass matrices and their factorizations, cached per mesh so that
//! structurally equal spaces share them.

use std::sync::{Arc, OnceLock};

use faer::Mat;

use super::sparse::CsrMatrix;
use crate::assembly::assemble_mass;
use crate::c64;
use crate::error::{Error, Result};
use crate::solver::{dense_lu, DenseLu};
use crate::space::FunctionSpace;

// Largest diagonal block inverted explicitly.
const EXPLICIT_BLOCK_LIMIT: usize = 64;

/// A factorized square pairing mass matrix.
#[derive(Debug)]
pub enum MassFactor {
    /// Block-diagonal matrices (DP1, P0, ...) keep an exact sparse inverse.
    Explicit { inverse: CsrMatrix },
    Lu(DenseLu),
}

impl MassFactor {
    pub fn new(m: &CsrMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::ConversionUnavailable(format!(
                "pairing mass matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let blocks = m.blocks();
        if blocks
            .iter()
            .all(|(r, c)| r.len() == c.len() && !r.is_empty() && r.len() <= EXPLICIT_BLOCK_LIMIT)
        {
            let mut triplets = Vec::with_capacity(m.nnz());
            for (rows, cols) in &blocks {
                let local = Mat::from_fn(rows.len(), cols.len(), |a, b| m.get(rows[a], cols[b]));
                let inv = dense_lu(local.as_ref())?.inverse();
                // Inverse maps row space to column space.
                for (a, &c) in cols.iter().enumerate() {
                    for (b, &r) in rows.iter().enumerate() {
                        triplets.push((c, r, inv[(a, b)]));
                    }
                }
            }
            return Ok(MassFactor::Explicit {
                inverse: CsrMatrix::from_triplets(m.ncols(), m.nrows(), triplets),
            });
        }
        Ok(MassFactor::Lu(dense_lu(m.to_dense().as_ref())?))
    }

    pub fn dim(&self) -> usize {
        match self {
            MassFactor::Explicit { inverse } => inverse.nrows(),
            MassFactor::Lu(lu) => lu.dim(),
        }
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        match self {
            MassFactor::Explicit { inverse } => inverse.matvec(b),
            MassFactor::Lu(lu) => lu.solve(b),
        }
    }

    pub fn solve_mat(&self, b: &Mat<c64>) -> Mat<c64> {
        match self {
            MassFactor::Explicit { inverse } => inverse.mul_dense(b),
            MassFactor::Lu(lu) => {
                let mut x = b.clone();
                lu.solve_in_place(x.as_mut());
                x
            }
        }
    }

    pub fn solve_adjoint_mat(&self, b: &Mat<c64>) -> Mat<c64> {
        match self {
            MassFactor::Explicit { inverse } => inverse.adjoint().mul_dense(b),
            MassFactor::Lu(lu) => {
                let mut x = b.clone();
                lu.solve_adjoint_in_place(x.as_mut());
                x
            }
        }
    }

    pub fn inverse(&self) -> Mat<c64> {
        match self {
            MassFactor::Explicit { inverse } => inverse.to_dense(),
            MassFactor::Lu(lu) => lu.inverse(),
        }
    }
}

fn check_mesh(a: &FunctionSpace, b: &FunctionSpace) -> Result<()> {
    if a.same_mesh(b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{} and {} live on different meshes", a.kind(), b.kind())))
    }
}

/// `[M]_{ij} = <phi_j, psi_i>`, assembled once per (space, dual) pair.
pub fn mass_matrix(space: &FunctionSpace, dual: &FunctionSpace) -> Result<Arc<CsrMatrix>> {
    check_mesh(space, dual)?;
    let key = format!("mass:{}:{}", space.key(), dual.key());
    let slot = space.mesh().memo(&key, OnceLock::<Result<Arc<CsrMatrix>>>::new);
    slot.get_or_init(|| assemble_mass(space, dual).map(Arc::new)).clone()
}

/// Factorization of the `(space, dual)` pairing, computed once per mesh.
pub fn mass_factor(space: &FunctionSpace, dual: &FunctionSpace) -> Result<Arc<MassFactor>> {
    check_mesh(space, dual)?;
    if space.global_dof_count() != dual.global_dof_count() {
        return Err(Error::ConversionUnavailable(format!(
            "pairing between {} ({} dofs) and {} ({} dofs) is rectangular",
            space.kind(),
            space.global_dof_count(),
            dual.kind(),
            dual.global_dof_count()
        )));
    }
    let key = format!("factor:{}:{}", space.key(), dual.key());
    let slot = space.mesh().memo(&key, OnceLock::<Result<Arc<MassFactor>>>::new);
    slot.get_or_init(|| {
        let m = mass_matrix(space, dual)?;
        space.mesh().counters().record_factorization();
        MassFactor::new(&m).map(Arc::new)
    })
    .clone()
}
