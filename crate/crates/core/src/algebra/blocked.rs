//! Blocked operators acting on tuples of grid functions.

use std::sync::{Arc, OnceLock};

use faer::Mat;

use super::discrete::DiscreteOperator;
use super::grid_function::GridFunction;
use super::mass::mass_factor;
use super::operator::{l2_norm_of, BoundaryOperator};
use crate::c64;
use crate::error::{Error, Result};
use crate::space::FunctionSpace;

enum Source {
    Grid(Vec<Vec<Option<BoundaryOperator>>>),
    Sum(BlockedOperator, BlockedOperator),
    Scaled(c64, BlockedOperator),
    Product(BlockedOperator, BlockedOperator),
}

struct Inner {
    ranges: Vec<FunctionSpace>,
    duals: Vec<FunctionSpace>,
    domains: Vec<FunctionSpace>,
    source: Source,
    weak: OnceLock<Result<DiscreteOperator>>,
}

#[derive(Clone)]
pub struct BlockedOperator(Arc<Inner>);

impl std::fmt::Debug for BlockedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BlockedOperator({}x{})", self.0.ranges.len(), self.0.domains.len())
    }
}

fn first_in<'a>(
    items: impl Iterator<Item = &'a Option<BoundaryOperator>>,
    pick: impl Fn(&BoundaryOperator) -> &FunctionSpace,
    what: &str,
    index: usize,
) -> Result<FunctionSpace> {
    let mut found: Option<FunctionSpace> = None;
    for op in items.flatten() {
        let s = pick(op);
        match &found {
            None => found = Some(s.clone()),
            Some(f) if f != s => {
                return Err(Error::Blocked(format!("{what} {index} mixes {f:?} and {s:?}")));
            }
            _ => {}
        }
    }
    found.ok_or_else(|| Error::Blocked(format!("{what} {index} is empty")))
}

impl BlockedOperator {
    /// Validate a grid of operators: no empty rows or columns, one range and
    /// dual space per row, one domain per column.
    pub fn new(blocks: Vec<Vec<Option<BoundaryOperator>>>) -> Result<Self> {
        let m = blocks.len();
        let n = blocks.first().map_or(0, |r| r.len());
        if m == 0 || n == 0 || blocks.iter().any(|r| r.len() != n) {
            return Err(Error::Blocked("block grid must be a non-empty rectangle".into()));
        }
        let mut ranges = Vec::new();
        let mut duals = Vec::new();
        for (i, row) in blocks.iter().enumerate() {
            ranges.push(first_in(row.iter(), |o| o.range(), "row", i)?);
            duals.push(first_in(row.iter(), |o| o.dual_to_range(), "row", i)?);
        }
        let domains = (0..n)
            .map(|j| first_in(blocks.iter().map(|r| &r[j]), |o| o.domain(), "column", j))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(ranges, duals, domains, Source::Grid(blocks)))
    }

    fn build(ranges: Vec<FunctionSpace>, duals: Vec<FunctionSpace>, domains: Vec<FunctionSpace>, source: Source) -> Self {
        BlockedOperator(Arc::new(Inner {
            ranges,
            duals,
            domains,
            source,
            weak: OnceLock::new(),
        }))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.0.ranges.len(), self.0.domains.len())
    }

    pub fn domains(&self) -> &[FunctionSpace] {
        &self.0.domains
    }

    pub fn ranges(&self) -> &[FunctionSpace] {
        &self.0.ranges
    }

    pub fn duals(&self) -> &[FunctionSpace] {
        &self.0.duals
    }

    /// The operator at `(i, j)` if this is a plain grid.
    pub fn block(&self, i: usize, j: usize) -> Option<&BoundaryOperator> {
        match &self.0.source {
            Source::Grid(g) => g.get(i)?.get(j)?.as_ref(),
            _ => None,
        }
    }

    fn same_spaces(&self, other: &Self) -> Result<()> {
        if self.0.ranges != other.0.ranges || self.0.duals != other.0.duals || self.0.domains != other.0.domains {
            return Err(Error::SpaceMismatch("blocked operators have different spaces".into()));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.same_spaces(other)?;
        Ok(Self::build(
            self.0.ranges.clone(),
            self.0.duals.clone(),
            self.0.domains.clone(),
            Source::Sum(self.clone(), other.clone()),
        ))
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.sum(&other.scale(c64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, alpha: impl Into<c64>) -> Self {
        Self::build(
            self.0.ranges.clone(),
            self.0.duals.clone(),
            self.0.domains.clone(),
            Source::Scaled(alpha.into(), self.clone()),
        )
    }

    /// `self ⊙ a`: weak form `B blockdiag(M_k^{-1}) A` with one mass
    /// factorization per row of `a`.
    pub fn product(&self, a: &Self) -> Result<Self> {
        if a.0.ranges != self.0.domains {
            return Err(Error::SpaceMismatch(
                "blocked product: row ranges of the right factor differ from column domains of the left".into(),
            ));
        }
        Ok(Self::build(
            self.0.ranges.clone(),
            self.0.duals.clone(),
            a.0.domains.clone(),
            Source::Product(self.clone(), a.clone()),
        ))
    }

    pub fn weak_form(&self) -> Result<DiscreteOperator> {
        self.0
            .weak
            .get_or_init(|| match &self.0.source {
                Source::Grid(g) => {
                    let blocks = g
                        .iter()
                        .map(|row| row.iter().map(|op| op.as_ref().map(|o| o.weak_form()).transpose()).collect())
                        .collect::<Result<Vec<Vec<_>>>>()?;
                    DiscreteOperator::blocked(blocks)
                }
                Source::Sum(a, b) => a.weak_form()?.sum(&b.weak_form()?),
                Source::Scaled(alpha, a) => Ok(a.weak_form()?.scale(*alpha)),
                Source::Product(b, a) => b.weak_form()?.product(&a.strong_form()?),
            })
            .clone()
    }

    /// Row-wise mass inverses applied to the weak form.
    pub fn strong_form(&self) -> Result<DiscreteOperator> {
        let inverses = self
            .0
            .ranges
            .iter()
            .zip(&self.0.duals)
            .map(|(r, d)| Ok(DiscreteOperator::mass_inverse(mass_factor(r, d)?)))
            .collect::<Result<Vec<_>>>()?;
        DiscreteOperator::block_diagonal(inverses)?.product(&self.weak_form()?)
    }

    /// Discrete L^2 norm with block-diagonal Gram matrices.
    pub fn l2_operator_norm(&self) -> Result<f64> {
        let weak: Mat<c64> = self.weak_form()?.to_dense();
        l2_norm_of(&weak, &self.0.duals, &self.0.domains)
    }
}

/// Split a concatenated vector by the dof counts of `spaces`.
pub fn split(v: &[c64], spaces: &[FunctionSpace]) -> Vec<Vec<c64>> {
    let mut out = Vec::new();
    let mut off = 0;
    for s in spaces {
        let n = s.global_dof_count();
        out.push(v[off..off + n].to_vec());
        off += n;
    }
    out
}

/// `B [f_1, ..., f_n]`, one result per row as projections on the row duals.
pub fn apply_blocked(op: &BlockedOperator, fs: &[GridFunction]) -> Result<Vec<GridFunction>> {
    if fs.len() != op.domains().len() {
        return Err(Error::Blocked(format!(
            "operator has {} columns but {} functions were given",
            op.domains().len(),
            fs.len()
        )));
    }
    let mut x = Vec::new();
    for (j, (f, d)) in fs.iter().zip(op.domains()).enumerate() {
        if f.space() != d {
            return Err(Error::SpaceMismatch(format!("argument {j} lives in {:?}, column domain is {d:?}", f.space())));
        }
        x.extend(f.coefficients()?);
    }
    let y = op.weak_form()?.matvec(&x);
    split(&y, op.duals())
        .into_iter()
        .zip(op.ranges().iter().zip(op.duals()))
        .map(|(p, (r, d))| GridFunction::from_projections(r, d, p))
        .collect()
}
