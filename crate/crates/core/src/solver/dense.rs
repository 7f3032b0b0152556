//! Dense factorizations and spectra, backed by faer.

use faer::linalg::solvers::{DenseSolveCore, Llt, PartialPivLu, Solve};
use faer::{Mat, MatMut, MatRef, Side};

use crate::c64;
use crate::error::{Error, Result};

fn check(m: MatRef<'_, c64>, square: bool) -> Result<()> {
    if square && m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    for j in 0..m.ncols() {
        if m.col(j).iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(())
}

/// LU factorization with partial pivoting.
#[derive(Debug)]
pub struct DenseLu {
    lu: PartialPivLu<c64>,
}

/// Factorize a square matrix, rejecting it if a pivot is negligible relative to
/// the largest one.
pub fn dense_lu(m: MatRef<'_, c64>) -> Result<DenseLu> {
    check(m, true)?;
    let n = m.nrows();
    let lu = m.partial_piv_lu();
    let u = lu.U();
    let pivots: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    let tol = (n.max(1) as f64) * f64::EPSILON * largest;
    if let Some(i) = pivots.iter().position(|&p| !(p > tol)) {
        return Err(Error::Singular(format!(
            "pivot {i} of {n} has magnitude {:e} (largest {largest:e})",
            pivots[i]
        )));
    }
    Ok(DenseLu { lu })
}

impl DenseLu {
    pub fn dim(&self) -> usize {
        self.lu.U().nrows()
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        let mut x = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        x.col(0).iter().copied().collect()
    }

    /// Solve `M^H x = b`.
    pub fn solve_adjoint(&self, b: &[c64]) -> Vec<c64> {
        let mut x = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_adjoint_in_place(x.as_mut());
        x.col(0).iter().copied().collect()
    }

    pub fn solve_in_place(&self, x: MatMut<'_, c64>) {
        self.lu.solve_in_place(x);
    }

    pub fn solve_adjoint_in_place(&self, x: MatMut<'_, c64>) {
        self.lu.solve_adjoint_in_place(x);
    }

    pub fn inverse(&self) -> Mat<c64> {
        self.lu.inverse()
    }
}

/// Cholesky factor `M = L L^H` of a Hermitian positive definite matrix.
#[derive(Debug)]
pub struct Cholesky {
    llt: Llt<c64>,
}

pub fn cholesky(m: MatRef<'_, c64>) -> Result<Cholesky> {
    check(m, true)?;
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotPositiveDefinite(format!("entry ({i}, {j}) breaks Hermitian symmetry")));
            }
        }
    }
    let llt = m
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("{e:?}")))?;
    Ok(Cholesky { llt })
}

impl Cholesky {
    pub fn l(&self) -> MatRef<'_, c64> {
        self.llt.L()
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        let mut x = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.llt.solve_in_place(x.as_mut());
        x.col(0).iter().copied().collect()
    }

    /// `L^{-1} A L^{-H}`, the representation of `A` in the orthonormalised
    /// basis.
    pub fn congruence(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
        let par = faer::get_global_parallelism();
        let l = self.l();
        let mut x = a.to_owned();
        solve_lower_triangular_in_place(l, x.as_mut(), par);
        let mut y = x.adjoint().to_owned();
        solve_lower_triangular_in_place(l, y.as_mut(), par);
        y.adjoint().to_owned()
    }
}

/// All eigenvalues of a square matrix, in no particular order.
pub fn dense_eig(m: MatRef<'_, c64>) -> Result<Vec<c64>> {
    check(m, true)?;
    m.eigenvalues()
        .map_err(|e| Error::InvalidArgument(format!("eigenvalue iteration failed: {e:?}")))
}

/// Singular values in descending order.
pub fn dense_svd(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    check(m, false)?;
    let mut s = m
        .singular_values()
        .map_err(|e| Error::InvalidArgument(format!("svd iteration failed: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Eigenvalues of the Hermitian pencil `A x = lambda B x` with `B` positive
/// definite, ascending.
pub fn generalized_eigenvalues_hermitian(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<Vec<f64>> {
    check(a, true)?;
    let chol = cholesky(b)?;
    let mut c = chol.congruence(a);
    // Remove the rounding-level skew part before the self-adjoint solver.
    let n = c.nrows();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)].conj());
            c[(i, j)] = avg;
            c[(j, i)] = avg.conj();
        }
        c[(i, i)] = c64::new(c[(i, i)].re, 0.0);
    }
    c.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::InvalidArgument(format!("eigenvalue iteration failed: {e:?}")))
}
