//! GMRES on operator actions, and its operator-aware front ends.

use std::time::Instant;

use crate::algebra::{split, BlockedOperator, BoundaryOperator, GridFunction};
use crate::c64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Relative residual norms, starting with the initial one.
    pub residual_history: Vec<f64>,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov dimension before a restart; `None` runs full GMRES.
    pub restart: Option<usize>,
    /// Solve `M^{-1} A x = coefficients(b)` instead of `A x = projections(b)`.
    pub use_strong_form: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-5,
            max_iter: 1000,
            restart: None,
            use_strong_form: false,
        }
    }
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solve `A x = b` from `x = 0`; stops when `|b - A x| <= tol |b|`.
pub fn gmres_raw(matvec: impl Fn(&[c64]) -> Vec<c64>, b: &[c64], opts: GmresOptions) -> Result<(Vec<c64>, SolveReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let start = Instant::now();
    let n = b.len();
    let mut x = vec![c64::new(0.0, 0.0); n];
    let bnorm = norm(b);
    let mut history = Vec::new();
    if bnorm == 0.0 {
        history.push(0.0);
        return Ok((x, SolveReport { converged: true, iterations: 0, residual_history: history, wall_time: 0.0 }));
    }
    let restart = opts.restart.unwrap_or(opts.max_iter).max(1);
    let mut iterations = 0;
    let mut r = b.to_vec();
    history.push(1.0);
    'outer: loop {
        let beta = norm(&r);
        let mut basis: Vec<Vec<c64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h: Vec<Vec<c64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<c64>) = (Vec::new(), Vec::new());
        let mut g = vec![c64::new(beta, 0.0)];
        let mut done = false;
        for j in 0..restart {
            if iterations >= opts.max_iter {
                break;
            }
            iterations += 1;
            let mut w = matvec(&basis[j]);
            let mut col = vec![c64::new(0.0, 0.0); j + 2];
            for i in 0..=j {
                let hij = dot(&basis[i], &w);
                col[i] = hij;
                w.iter_mut().zip(&basis[i]).for_each(|(a, v)| *a -= hij * v);
            }
            let wn = norm(&w);
            col[j + 1] = c64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i].conj() * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            // New rotation zeroing col[j + 1].
            let (a, bb) = (col[j], col[j + 1]);
            let rho = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if a.norm() == 0.0 {
                (0.0, c64::new(1.0, 0.0))
            } else {
                let phase = a / a.norm();
                (a.norm() / rho, phase * bb.conj() / rho)
            };
            cs.push(c);
            sn.push(s);
            col[j] = c * a + s * bb;
            col[j + 1] = c64::new(0.0, 0.0);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            h.push(col);
            let res = g[j + 1].norm() / bnorm;
            history.push(res);
            if res <= opts.tol || wn == 0.0 {
                done = true;
            } else {
                basis.push(w.iter().map(|z| z / wn).collect());
            }
            if done {
                break;
            }
        }
        // Back substitution on the triangular system.
        let m = h.len();
        let mut y = vec![c64::new(0.0, 0.0); m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for k in i + 1..m {
                acc -= h[k][i] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[k]).for_each(|(a, v)| *a += yk * v);
        }
        if done || iterations >= opts.max_iter {
            break 'outer;
        }
        let ax = matvec(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    }
    let last = *history.last().unwrap();
    Ok((
        x,
        SolveReport {
            converged: last <= opts.tol,
            iterations,
            residual_history: history,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Solve `op x = b` and return `x` as a function on `op.domain()`.
pub fn gmres(op: &BoundaryOperator, b: &GridFunction, opts: GmresOptions) -> Result<(GridFunction, SolveReport)> {
    let (rhs, matrix) = if opts.use_strong_form {
        if b.space() != op.range() {
            return Err(Error::SpaceMismatch(format!(
                "right-hand side lives in {:?}, operator range is {:?}",
                b.space(),
                op.range()
            )));
        }
        (b.coefficients()?, op.strong_form()?)
    } else {
        if !b.space().same_mesh(op.dual_to_range()) {
            return Err(Error::SpaceMismatch("right-hand side lives on another mesh".into()));
        }
        (b.projections(op.dual_to_range())?, op.weak_form()?)
    };
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Dimension {
            expected: matrix.ncols(),
            actual: matrix.nrows(),
        });
    }
    let (x, report) = gmres_raw(|v| matrix.matvec(v), &rhs, opts)?;
    Ok((GridFunction::from_coefficients(op.domain(), x)?, report))
}

/// Blocked counterpart of [`gmres`].
pub fn gmres_blocked(op: &BlockedOperator, b: &[GridFunction], opts: GmresOptions) -> Result<(Vec<GridFunction>, SolveReport)> {
    if b.len() != op.ranges().len() {
        return Err(Error::Blocked(format!("{} right-hand sides for {} rows", b.len(), op.ranges().len())));
    }
    let mut rhs = Vec::new();
    for (i, f) in b.iter().enumerate() {
        if opts.use_strong_form {
            if f.space() != &op.ranges()[i] {
                return Err(Error::SpaceMismatch(format!("right-hand side {i} is not in the row range")));
            }
            rhs.extend(f.coefficients()?);
        } else {
            rhs.extend(f.projections(&op.duals()[i])?);
        }
    }
    let matrix = if opts.use_strong_form { op.strong_form()? } else { op.weak_form()? };
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Dimension {
            expected: matrix.ncols(),
            actual: matrix.nrows(),
        });
    }
    let (x, report) = gmres_raw(|v| matrix.matvec(v), &rhs, opts)?;
    let parts = split(&x, op.domains())
        .into_iter()
        .zip(op.domains())
        .map(|(c, s)| GridFunction::from_coefficients(s, c))
        .collect::<Result<Vec<_>>>()?;
    Ok((parts, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_a_nonsymmetric_complex_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let a: Vec<Vec<c64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = if i == j { 4.0 } else { 0.0 };
                        c64::new(d + rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))
                    })
                    .collect()
            })
            .collect();
        let mv = |x: &[c64]| -> Vec<c64> { a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect() };
        let b: Vec<c64> = (0..n).map(|i| c64::new(i as f64, 1.0)).collect();
        for restart in [None, Some(5)] {
            let opts = GmresOptions { tol: 1e-12, restart, ..Default::default() };
            let (x, rep) = gmres_raw(mv, &b, opts).unwrap();
            assert!(rep.converged);
            let r: Vec<c64> = mv(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm(&r) <= 1e-11 * norm(&b));
            assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) || restart.is_some());
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![c64::new(1.0, 2.0), c64::new(-3.0, 0.5)];
        let (x, rep) = gmres_raw(|v| v.to_vec(), &b, GmresOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(x.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-14));
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        // A rotation needs n steps; allow fewer.
        let n = 8;
        let mv = |x: &[c64]| -> Vec<c64> { (0..n).map(|i| x[(i + 1) % n]).collect() };
        let mut b = vec![c64::new(0.0, 0.0); n];
        b[0] = c64::new(1.0, 0.0);
        let opts = GmresOptions { max_iter: 3, ..Default::default() };
        let (_, rep) = gmres_raw(mv, &b, opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
        assert!(gmres_raw(mv, &b, GmresOptions { tol: 0.0, ..Default::default() }).is_err());
    }
}
