//! Compressed sparse row matrices for mass and surface-derivative operators.

use faer::Mat;

use crate::c64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<c64>,
}

impl CsrMatrix {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed in a
    /// fixed order, so equal input gives bit-identical output.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, c64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<c64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, c64::new(1.0, 0.0))).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let range = self.indptr[r]..self.indptr[r + 1];
        self.indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> c64 {
        self.row(r).find(|&(j, _)| j == c).map(|(_, v)| v).unwrap_or_default()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, c64)> {
        (0..self.rows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    pub fn matvec(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `A^H x`.
    pub fn matvec_adjoint(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![c64::default(); self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                y[c] += v.conj() * xr;
            }
        }
        y
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let t = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn scale(&self, alpha: c64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.rows, self.cols, t)
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut t = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.rows, other.cols, t)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `self * dense`.
    pub fn mul_dense(&self, x: &Mat<c64>) -> Mat<c64> {
        assert_eq!(self.cols, x.nrows());
        let mut out = Mat::zeros(self.rows, x.ncols());
        for j in 0..x.ncols() {
            let col = x.col(j);
            for r in 0..self.rows {
                let mut acc = c64::default();
                for (c, v) in self.row(r) {
                    acc += v * col[c];
                }
                out[(r, j)] = acc;
            }
        }
        out
    }

    /// `dense * self`.
    pub fn dense_mul(x: &Mat<c64>, s: &Self) -> Mat<c64> {
        assert_eq!(x.ncols(), s.rows);
        let mut out = Mat::zeros(x.nrows(), s.cols);
        for k in 0..s.rows {
            let xk = x.col(k);
            for (c, v) in s.row(k) {
                let mut oc = out.col_mut(c);
                for i in 0..x.nrows() {
                    oc[i] += xk[i] * v;
                }
            }
        }
        out
    }

    /// Connected components of the row/column incidence graph, as (rows, cols)
    /// index lists. Used to recognise block-diagonal matrices.
    pub fn blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        // Union-find over rows (0..rows) and columns (rows..rows+cols).
        let mut parent: Vec<usize> = (0..self.rows + self.cols).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for r in 0..self.rows {
            for (c, _) in self.row(r) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, self.rows + c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut id = vec![usize::MAX; self.rows + self.cols];
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for i in 0..self.rows + self.cols {
            let root = find(&mut parent, i);
            if id[root] == usize::MAX {
                id[root] = out.len();
                out.push((Vec::new(), Vec::new()));
            }
            let block = &mut out[id[root]];
            if i < self.rows {
                block.0.push(i);
            } else {
                block.1.push(i - self.rows);
            }
        }
        out
    }
}
