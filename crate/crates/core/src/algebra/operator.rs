//! Boundary operators: a (domain, range, dual-to-range) triple with a lazily
//! computed, cached weak form.

use std::fmt;
use std::sync::{Arc, OnceLock};

use faer::Mat;

use super::discrete::DiscreteOperator;
use super::mass::{mass_factor, mass_matrix};
use crate::assembly::{assemble_dense, Kernel, OperatorKind, Request};
use crate::c64;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureOrders;
use crate::space::FunctionSpace;

type Provider = Arc<dyn Fn() -> Result<DiscreteOperator> + Send + Sync>;

enum Source {
    Leaf(Provider),
    Sum(BoundaryOperator, BoundaryOperator),
    Scaled(c64, BoundaryOperator),
    Product(BoundaryOperator, BoundaryOperator),
    DualProduct(BoundaryOperator, BoundaryOperator),
}

struct Inner {
    domain: FunctionSpace,
    range: FunctionSpace,
    dual: FunctionSpace,
    label: String,
    source: Source,
    weak: OnceLock<Result<DiscreteOperator>>,
}

#[derive(Clone)]
pub struct BoundaryOperator(Arc<Inner>);

impl fmt::Debug for BoundaryOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({:?} -> {:?}, dual {:?})",
            self.0.label, self.0.domain, self.0.range, self.0.dual
        )
    }
}

fn same(a: &FunctionSpace, b: &FunctionSpace, what: &str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{what}: {a:?} differs from {b:?}")))
    }
}

impl BoundaryOperator {
    fn build(domain: &FunctionSpace, range: &FunctionSpace, dual: &FunctionSpace, label: String, source: Source) -> Self {
        BoundaryOperator(Arc::new(Inner {
            domain: domain.clone(),
            range: range.clone(),
            dual: dual.clone(),
            label,
            source,
            weak: OnceLock::new(),
        }))
    }

    /// An operator whose weak form comes from `provider`, called at most once.
    pub fn from_provider(
        domain: &FunctionSpace,
        range: &FunctionSpace,
        dual: &FunctionSpace,
        label: &str,
        provider: impl Fn() -> Result<DiscreteOperator> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(domain.same_mesh(range) && domain.same_mesh(dual)) {
            return Err(Error::SpaceMismatch("operator spaces live on different meshes".into()));
        }
        Ok(Self::build(domain, range, dual, label.to_string(), Source::Leaf(Arc::new(provider))))
    }

    /// An operator with a fixed weak form.
    pub fn from_weak_form(
        domain: &FunctionSpace,
        range: &FunctionSpace,
        dual: &FunctionSpace,
        label: &str,
        weak: DiscreteOperator,
    ) -> Result<Self> {
        if weak.shape() != (dual.global_dof_count(), domain.global_dof_count()) {
            return Err(Error::Dimension {
                expected: dual.global_dof_count(),
                actual: weak.nrows(),
            });
        }
        Self::from_provider(domain, range, dual, label, move || Ok(weak.clone()))
    }

    /// `Id: domain -> range`, weak form `<phi_j, psi_i>`.
    pub fn identity(domain: &FunctionSpace, range: &FunctionSpace, dual: &FunctionSpace) -> Result<Self> {
        let (d, t) = (domain.clone(), dual.clone());
        Self::from_provider(domain, range, dual, "identity", move || {
            Ok(DiscreteOperator::sparse((*mass_matrix(&d, &t)?).clone()))
        })
    }

    pub fn single_layer(kernel: Kernel, domain: &FunctionSpace, range: &FunctionSpace, dual: &FunctionSpace) -> Result<Self> {
        Self::elementary(OperatorKind::SingleLayer, kernel, domain, range, dual, QuadratureOrders::default())
    }

    pub fn double_layer(kernel: Kernel, domain: &FunctionSpace, range: &FunctionSpace, dual: &FunctionSpace) -> Result<Self> {
        Self::elementary(OperatorKind::DoubleLayer, kernel, domain, range, dual, QuadratureOrders::default())
    }

    pub fn adjoint_double_layer(kernel: Kernel, domain: &FunctionSpace, range: &FunctionSpace, dual: &FunctionSpace) -> Result<Self> {
        Self::elementary(OperatorKind::AdjointDoubleLayer, kernel, domain, range, dual, QuadratureOrders::default())
    }

    pub fn hypersingular(kernel: Kernel, domain: &FunctionSpace, range: &FunctionSpace, dual: &FunctionSpace) -> Result<Self> {
        Self::elementary(OperatorKind::Hypersingular, kernel, domain, range, dual, QuadratureOrders::default())
    }

    /// A dense elementary operator assembled on first use.
    pub fn elementary(
        kind: OperatorKind,
        kernel: Kernel,
        domain: &FunctionSpace,
        range: &FunctionSpace,
        dual: &FunctionSpace,
        orders: QuadratureOrders,
    ) -> Result<Self> {
        Ok(Self::fused(
            kernel,
            &[(kind, domain.clone(), range.clone(), dual.clone())],
            orders,
        )?
        .remove(0))
    }

    /// Several elementary operators on one grid that share a single pass of
    /// element-pair integration, triggered by the first weak-form request.
    pub fn fused(
        kernel: Kernel,
        ops: &[(OperatorKind, FunctionSpace, FunctionSpace, FunctionSpace)],
        orders: QuadratureOrders,
    ) -> Result<Vec<Self>> {
        let requests: Vec<Request> = ops
            .iter()
            .map(|(kind, domain, _, dual)| Request {
                kind: *kind,
                domain: domain.clone(),
                dual: dual.clone(),
            })
            .collect();
        // Validate eagerly; the assembly itself is deferred.
        for (_, domain, range, dual) in ops {
            if !(domain.same_mesh(range) && domain.same_mesh(dual)) {
                return Err(Error::SpaceMismatch("operator spaces live on different meshes".into()));
            }
        }
        let batch: Arc<OnceLock<Result<Vec<DiscreteOperator>>>> = Arc::new(OnceLock::new());
        let requests = Arc::new(requests);
        Ok(ops
            .iter()
            .enumerate()
            .map(|(idx, (kind, domain, range, dual))| {
                let (batch, requests) = (batch.clone(), requests.clone());
                let provider = move || -> Result<DiscreteOperator> {
                    let all = batch.get_or_init(|| {
                        assemble_dense(kernel, &requests, orders)
                            .map(|ms| ms.into_iter().map(DiscreteOperator::dense).collect())
                    });
                    all.as_ref().map(|v| v[idx].clone()).map_err(Clone::clone)
                };
                let label = if kernel.is_laplace() {
                    kind.name().to_string()
                } else {
                    format!("{}(k={})", kind.name(), kernel.wavenumber())
                };
                Self::build(domain, range, dual, label, Source::Leaf(Arc::new(provider)))
            })
            .collect())
    }

    pub fn domain(&self) -> &FunctionSpace {
        &self.0.domain
    }

    pub fn range(&self) -> &FunctionSpace {
        &self.0.range
    }

    pub fn dual_to_range(&self) -> &FunctionSpace {
        &self.0.dual
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// The Galerkin matrix, computed on the first call and cached.
    pub fn weak_form(&self) -> Result<DiscreteOperator> {
        self.0
            .weak
            .get_or_init(|| match &self.0.source {
                Source::Leaf(p) => p(),
                Source::Sum(a, b) => a.weak_form()?.sum(&b.weak_form()?),
                Source::Scaled(alpha, a) => Ok(a.weak_form()?.scale(*alpha)),
                Source::Product(b, a) => b.weak_form()?.product(&a.strong_form()?),
                Source::DualProduct(b, a) => b.strong_form()?.adjoint().product(&a.weak_form()?),
            })
            .clone()
    }

    /// `M^{-1} A` with `M` the (range, dual) pairing.
    pub fn strong_form(&self) -> Result<DiscreteOperator> {
        let factor = mass_factor(&self.0.range, &self.0.dual)?;
        DiscreteOperator::mass_inverse(factor).product(&self.weak_form()?)
    }

    fn check_triple(&self, other: &Self, what: &str) -> Result<()> {
        same(&self.0.domain, &other.0.domain, &format!("{what} domain"))?;
        same(&self.0.range, &other.0.range, &format!("{what} range"))?;
        same(&self.0.dual, &other.0.dual, &format!("{what} dual space"))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_triple(other, "sum")?;
        Ok(Self::build(
            &self.0.domain,
            &self.0.range,
            &self.0.dual,
            format!("({} + {})", self.0.label, other.0.label),
            Source::Sum(self.clone(), other.clone()),
        ))
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.sum(&other.scale(c64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, alpha: impl Into<c64>) -> Self {
        let alpha = alpha.into();
        Self::build(
            &self.0.domain,
            &self.0.range,
            &self.0.dual,
            format!("{alpha}*{}", self.0.label),
            Source::Scaled(alpha, self.clone()),
        )
    }

    /// `self ⊙ a`: apply `a` first. Weak form `B M_A^{-1} A`.
    pub fn product(&self, a: &Self) -> Result<Self> {
        same(&a.0.range, &self.0.domain, "product: range of the right factor vs domain of the left")?;
        Ok(Self::build(
            &a.0.domain,
            &self.0.range,
            &self.0.dual,
            format!("{} * {}", self.0.label, a.0.label),
            Source::Product(self.clone(), a.clone()),
        ))
    }

    /// `self ⊙_D a`: weak form `(M_B^{-1} B)^H A`, spaces (a.domain,
    /// a.range, self.domain).
    pub fn dual_product(&self, a: &Self) -> Result<Self> {
        same(&self.0.range, &a.0.dual, "dual product: range of the left factor vs dual space of the right")?;
        Ok(Self::build(
            &a.0.domain,
            &a.0.range,
            &self.0.domain,
            format!("{} *D {}", self.0.label, a.0.label),
            Source::DualProduct(self.clone(), a.clone()),
        ))
    }

    /// Largest singular value of `L_dual^{-1} A L_domain^{-H}` for the Cholesky
    /// factors of the self-pairing Gram matrices: the discrete L^2 operator
    /// norm, which differs in general from the norm of the strong form.
    pub fn l2_operator_norm(&self) -> Result<f64> {
        let weak = self.weak_form()?.to_dense();
        l2_norm_of(&weak, &[self.0.dual.clone()], &[self.0.domain.clone()])
    }
}

pub(crate) fn gram(spaces: &[FunctionSpace]) -> Result<Mat<c64>> {
    let n: usize = spaces.iter().map(|s| s.global_dof_count()).sum();
    let mut out = Mat::zeros(n, n);
    let mut off = 0;
    for s in spaces {
        let m = mass_matrix(s, s)?;
        for r in 0..m.nrows() {
            for (c, v) in m.row(r) {
                out[(off + r, off + c)] = v;
            }
        }
        off += s.global_dof_count();
    }
    Ok(out)
}

pub(crate) fn l2_norm_of(weak: &Mat<c64>, rows: &[FunctionSpace], cols: &[FunctionSpace]) -> Result<f64> {
    use crate::solver::{cholesky, dense_svd};
    let lr = cholesky(gram(rows)?.as_ref())?;
    let lc = cholesky(gram(cols)?.as_ref())?;
    use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
    let par = faer::get_global_parallelism();
    let mut x = weak.clone();
    solve_lower_triangular_in_place(lr.l(), x.as_mut(), par);
    let mut y = x.adjoint().to_owned();
    solve_lower_triangular_in_place(lc.l(), y.as_mut(), par);
    Ok(dense_svd(y.as_ref())?.first().copied().unwrap_or(0.0))
}
