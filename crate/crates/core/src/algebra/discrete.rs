//! Lazy discrete operators: matrices, inverse masses and expression nodes
//! over them.

use std::fmt;
use std::sync::Arc;

use faer::Mat;

use super::mass::MassFactor;
use super::sparse::CsrMatrix;
use crate::c64;
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct DiscreteOperator(Arc<Node>);

enum Node {
    Dense(Mat<c64>),
    Sparse(CsrMatrix),
    MassInverse(Arc<MassFactor>),
    Product(DiscreteOperator, DiscreteOperator),
    Sum(DiscreteOperator, DiscreteOperator),
    Scaled(c64, DiscreteOperator),
    Adjoint(DiscreteOperator),
    Zero(usize, usize),
    Blocked(Blocks),
    // u v^H
    RankOne(Vec<c64>, Vec<c64>),
}

struct Blocks {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
    blocks: Vec<Vec<Option<DiscreteOperator>>>,
}

impl fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, c) = self.shape();
        let kind = match &*self.0 {
            Node::Dense(_) => "dense",
            Node::Sparse(_) => "sparse",
            Node::MassInverse(_) => "mass-inverse",
            Node::Product(..) => "product",
            Node::Sum(..) => "sum",
            Node::Scaled(..) => "scaled",
            Node::Adjoint(_) => "adjoint",
            Node::Zero(..) => "zero",
            Node::Blocked(_) => "blocked",
            Node::RankOne(..) => "rank-one",
        };
        write!(f, "DiscreteOperator({kind}, {r}x{c})")
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0];
    for s in sizes {
        out.push(out.last().unwrap() + s);
    }
    out
}

impl DiscreteOperator {
    fn node(node: Node) -> Self {
        DiscreteOperator(Arc::new(node))
    }

    pub fn dense(m: Mat<c64>) -> Self {
        Self::node(Node::Dense(m))
    }

    pub fn sparse(m: CsrMatrix) -> Self {
        Self::node(Node::Sparse(m))
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::node(Node::Zero(rows, cols))
    }

    /// `u v^H`.
    pub fn rank_one(u: Vec<c64>, v: Vec<c64>) -> Self {
        Self::node(Node::RankOne(u, v))
    }

    pub(crate) fn mass_inverse(factor: Arc<MassFactor>) -> Self {
        Self::node(Node::MassInverse(factor))
    }

    /// `self * right`.
    pub fn product(&self, right: &DiscreteOperator) -> Result<Self> {
        if self.ncols() != right.nrows() {
            return Err(Error::Dimension {
                expected: self.ncols(),
                actual: right.nrows(),
            });
        }
        Ok(Self::node(Node::Product(self.clone(), right.clone())))
    }

    pub fn sum(&self, other: &DiscreteOperator) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension {
                expected: self.nrows(),
                actual: other.nrows(),
            });
        }
        Ok(Self::node(Node::Sum(self.clone(), other.clone())))
    }

    pub fn scale(&self, alpha: c64) -> Self {
        Self::node(Node::Scaled(alpha, self.clone()))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::node(Node::Adjoint(self.clone()))
    }

    /// Block matrix; `None` entries are zero. Every row and column needs at
    /// least one block to fix its size.
    pub fn blocked(blocks: Vec<Vec<Option<DiscreteOperator>>>) -> Result<Self> {
        let m = blocks.len();
        let n = blocks.first().map_or(0, |r| r.len());
        if m == 0 || n == 0 || blocks.iter().any(|r| r.len() != n) {
            return Err(Error::Blocked("block grid must be a non-empty rectangle".into()));
        }
        let mut row_sizes = vec![None; m];
        let mut col_sizes = vec![None; n];
        for (i, row) in blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                let Some(b) = b else { continue };
                for (slot, size, what, idx) in [(&mut row_sizes[i], b.nrows(), "row", i), (&mut col_sizes[j], b.ncols(), "column", j)] {
                    match slot {
                        Some(s) if *s != size => {
                            return Err(Error::Blocked(format!("{what} {idx} has inconsistent sizes {s} and {size}")))
                        }
                        _ => *slot = Some(size),
                    }
                }
            }
        }
        let unwrap = |v: Vec<Option<usize>>, what: &str| -> Result<Vec<usize>> {
            v.into_iter()
                .enumerate()
                .map(|(i, s)| s.ok_or_else(|| Error::Blocked(format!("{what} {i} is empty"))))
                .collect()
        };
        Ok(Self::node(Node::Blocked(Blocks {
            row_sizes: unwrap(row_sizes, "row")?,
            col_sizes: unwrap(col_sizes, "column")?,
            blocks,
        })))
    }

    /// Block-diagonal operator.
    pub fn block_diagonal(diag: Vec<DiscreteOperator>) -> Result<Self> {
        let n = diag.len();
        let blocks = diag
            .into_iter()
            .enumerate()
            .map(|(i, d)| (0..n).map(|j| (i == j).then(|| d.clone())).collect())
            .collect();
        Self::blocked(blocks)
    }

    pub fn shape(&self) -> (usize, usize) {
        match &*self.0 {
            Node::Dense(m) => (m.nrows(), m.ncols()),
            Node::Sparse(s) => (s.nrows(), s.ncols()),
            Node::MassInverse(f) => (f.dim(), f.dim()),
            Node::Product(l, r) => (l.nrows(), r.ncols()),
            Node::Sum(a, _) => a.shape(),
            Node::Scaled(_, a) => a.shape(),
            Node::Adjoint(a) => (a.ncols(), a.nrows()),
            Node::Zero(r, c) => (*r, *c),
            Node::Blocked(b) => (b.row_sizes.iter().sum(), b.col_sizes.iter().sum()),
            Node::RankOne(u, v) => (u.len(), v.len()),
        }
    }

    pub fn nrows(&self) -> usize {
        self.shape().0
    }

    pub fn ncols(&self) -> usize {
        self.shape().1
    }

    /// The sparse matrix if this node is one.
    pub fn as_sparse(&self) -> Option<&CsrMatrix> {
        match &*self.0 {
            Node::Sparse(s) => Some(s),
            _ => None,
        }
    }

    pub fn matvec(&self, x: &[c64]) -> Vec<c64> {
        let m = Mat::from_fn(x.len(), 1, |i, _| x[i]);
        self.apply_mat(&m).col(0).iter().copied().collect()
    }

    /// `A^H x`.
    pub fn matvec_adjoint(&self, x: &[c64]) -> Vec<c64> {
        let m = Mat::from_fn(x.len(), 1, |i, _| x[i]);
        self.apply_adjoint_mat(&m).col(0).iter().copied().collect()
    }

    /// `A X` for a block of columns.
    pub fn apply_mat(&self, x: &Mat<c64>) -> Mat<c64> {
        assert_eq!(x.nrows(), self.ncols(), "operand has wrong row count");
        match &*self.0 {
            Node::Dense(m) => m * x,
            Node::Sparse(s) => s.mul_dense(x),
            Node::MassInverse(f) => f.solve_mat(x),
            Node::Product(l, r) => l.apply_mat(&r.apply_mat(x)),
            Node::Sum(a, b) => a.apply_mat(x) + b.apply_mat(x),
            Node::Scaled(alpha, a) => {
                let mut y = a.apply_mat(x);
                scale_in_place(&mut y, *alpha);
                y
            }
            Node::Adjoint(a) => a.apply_adjoint_mat(x),
            Node::Zero(r, _) => Mat::zeros(*r, x.ncols()),
            Node::Blocked(b) => b.apply(x, false),
            Node::RankOne(u, v) => outer_apply(u, v, x),
        }
    }

    /// `A^H X`.
    pub fn apply_adjoint_mat(&self, x: &Mat<c64>) -> Mat<c64> {
        assert_eq!(x.nrows(), self.nrows(), "operand has wrong row count");
        match &*self.0 {
            Node::Dense(m) => m.adjoint() * x,
            Node::Sparse(s) => s.adjoint().mul_dense(x),
            Node::MassInverse(f) => f.solve_adjoint_mat(x),
            Node::Product(l, r) => r.apply_adjoint_mat(&l.apply_adjoint_mat(x)),
            Node::Sum(a, b) => a.apply_adjoint_mat(x) + b.apply_adjoint_mat(x),
            Node::Scaled(alpha, a) => {
                let mut y = a.apply_adjoint_mat(x);
                scale_in_place(&mut y, alpha.conj());
                y
            }
            Node::Adjoint(a) => a.apply_mat(x),
            Node::Zero(_, c) => Mat::zeros(*c, x.ncols()),
            Node::Blocked(b) => b.apply(x, true),
            Node::RankOne(u, v) => outer_apply(v, u, x),
        }
    }

    /// Materialize as a dense matrix.
    pub fn to_dense(&self) -> Mat<c64> {
        match &*self.0 {
            Node::Dense(m) => m.clone(),
            Node::Sparse(s) => s.to_dense(),
            Node::MassInverse(f) => f.inverse(),
            Node::Product(l, r) => match (l.as_sparse(), r.as_sparse()) {
                (Some(a), Some(b)) => a.mul(b).to_dense(),
                (_, Some(b)) => CsrMatrix::dense_mul(&l.to_dense(), b),
                _ => l.apply_mat(&r.to_dense()),
            },
            Node::Sum(a, b) => a.to_dense() + b.to_dense(),
            Node::Scaled(alpha, a) => {
                let mut y = a.to_dense();
                scale_in_place(&mut y, *alpha);
                y
            }
            Node::Adjoint(a) => a.to_dense().adjoint().to_owned(),
            Node::Zero(r, c) => Mat::zeros(*r, *c),
            Node::RankOne(u, v) => Mat::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj()),
            Node::Blocked(b) => {
                let (ro, co) = (offsets(&b.row_sizes), offsets(&b.col_sizes));
                let mut out = Mat::zeros(*ro.last().unwrap(), *co.last().unwrap());
                for (i, row) in b.blocks.iter().enumerate() {
                    for (j, blk) in row.iter().enumerate() {
                        if let Some(blk) = blk {
                            out.as_mut()
                                .submatrix_mut(ro[i], co[j], b.row_sizes[i], b.col_sizes[j])
                                .copy_from(blk.to_dense().as_ref());
                        }
                    }
                }
                out
            }
        }
    }
}

// u (v^H X)
fn outer_apply(u: &[c64], v: &[c64], x: &Mat<c64>) -> Mat<c64> {
    let coef: Vec<c64> = (0..x.ncols())
        .map(|j| v.iter().zip(x.col(j).iter()).map(|(a, b)| a.conj() * b).sum())
        .collect();
    Mat::from_fn(u.len(), x.ncols(), |i, j| u[i] * coef[j])
}

fn scale_in_place(m: &mut Mat<c64>, alpha: c64) {
    for j in 0..m.ncols() {
        m.col_mut(j).iter_mut().for_each(|z| *z *= alpha);
    }
}

impl Blocks {
    fn apply(&self, x: &Mat<c64>, adjoint: bool) -> Mat<c64> {
        let (ro, co) = (offsets(&self.row_sizes), offsets(&self.col_sizes));
        let (out_off, in_off) = if adjoint { (&co, &ro) } else { (&ro, &co) };
        let mut out = Mat::zeros(*out_off.last().unwrap(), x.ncols());
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, blk) in row.iter().enumerate() {
                let Some(blk) = blk else { continue };
                let (o, ii) = if adjoint { (j, i) } else { (i, j) };
                let part = x.as_ref().subrows(in_off[ii], in_off[ii + 1] - in_off[ii]).to_owned();
                let y = if adjoint { blk.apply_adjoint_mat(&part) } else { blk.apply_mat(&part) };
                let mut target = out.as_mut().subrows_mut(out_off[o], out_off[o + 1] - out_off[o]);
                for c in 0..y.ncols() {
                    for r in 0..y.nrows() {
                        target[(r, c)] += y[(r, c)];
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat<c64> {
        Mat::from_fn(rows, cols, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn close(a: &Mat<c64>, b: &Mat<c64>) -> bool {
        (a - b).norm_max() <= 1e-12 * b.norm_max().max(1.0)
    }

    #[test]
    fn expression_matvec_matches_materialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DiscreteOperator::dense(random(4, 3, &mut rng));
        let s = CsrMatrix::from_triplets(3, 3, vec![(0, 1, c64::new(2.0, 1.0)), (2, 2, c64::new(-1.0, 0.0))]);
        let b = DiscreteOperator::sparse(s);
        let c = DiscreteOperator::dense(random(4, 3, &mut rng));
        let expr = a
            .product(&b)
            .unwrap()
            .sum(&c.scale(c64::new(0.0, 2.0)))
            .unwrap()
            .adjoint();
        let dense = expr.to_dense();
        let x = random(4, 2, &mut rng);
        assert!(close(&expr.apply_mat(&x), &(&dense * &x)));
        let y = random(3, 2, &mut rng);
        assert!(close(&expr.apply_adjoint_mat(&y), &(dense.adjoint() * &y)));
        assert!(a.product(&a).is_err());
        let r = DiscreteOperator::rank_one(vec![c64::new(1.0, 1.0), c64::new(2.0, 0.0)], vec![c64::new(0.0, 1.0); 3]);
        let rd = r.to_dense();
        let x = random(3, 2, &mut rng);
        assert!(close(&r.apply_mat(&x), &(&rd * &x)));
        let y = random(2, 2, &mut rng);
        assert!(close(&r.apply_adjoint_mat(&y), &(rd.adjoint() * &y)));
    }

    #[test]
    fn blocked_with_empty_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DiscreteOperator::dense(random(2, 3, &mut rng));
        let d = DiscreteOperator::dense(random(4, 1, &mut rng));
        let blk = DiscreteOperator::blocked(vec![vec![Some(a.clone()), None], vec![None, Some(d.clone())]]).unwrap();
        assert_eq!(blk.shape(), (6, 4));
        let dense = blk.to_dense();
        let x = random(4, 1, &mut rng);
        assert!(close(&blk.apply_mat(&x), &(&dense * &x)));
        let y = random(6, 1, &mut rng);
        assert!(close(&blk.apply_adjoint_mat(&y), &(dense.adjoint() * &y)));
        assert!(DiscreteOperator::blocked(vec![vec![Some(a.clone()), None], vec![None, None]]).is_err());
        assert!(DiscreteOperator::blocked(vec![vec![Some(a.clone())], vec![Some(d)]]).is_err());
    }
}
