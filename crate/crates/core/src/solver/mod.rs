//! Dense factorizations and the operator-aware GMRES solver.

mod dense;
mod gmres;

pub use dense::{
    cholesky, dense_eig, dense_lu, dense_svd, generalized_eigenvalues_hermitian, Cholesky, DenseLu,
};
pub use gmres::{gmres, gmres_blocked, gmres_raw, GmresOptions, SolveReport};
