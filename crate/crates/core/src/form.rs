//! Data model: symmetric forms, inner products, the two-ellipsoid space and
//! subspaces given by basis rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Scale-invariant definiteness gate: `λ_min > PD_TOL · λ_max`.
pub const PD_TOL: f64 = 1e-10;

/// A real symmetric `n×n` matrix; the unique symmetric representative of a
/// 2-polynomial `P(x) = xᵀBx` and of its bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymForm {
    m: DMatrix<f64>,
}

impl SymForm {
    /// Builds `(M + Mᵀ)/2` from a square matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "form must be square with n >= 1, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("form has non-finite entries".into()));
        }
        Ok(SymForm {
            m: linalg::symmetrize(&m),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows, rows.len())?)
    }

    pub fn identity(n: usize) -> Self {
        SymForm {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymForm {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymForm {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// `xᵀBx`.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(linalg::quad(&self.m, x))
    }

    /// `uᵀBv`.
    pub fn bilinear(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        check_dim(self.dim(), v.len())?;
        Ok((u.transpose() * &self.m * v)[(0, 0)])
    }

    pub fn scaled(&self, t: f64) -> SymForm {
        SymForm { m: &self.m * t }
    }

    pub fn neg(&self) -> SymForm {
        self.scaled(-1.0)
    }

    /// `t·self + (1−t)·other`.
    pub fn combine(&self, other: &SymForm, t: f64) -> Result<SymForm> {
        check_dim(self.dim(), other.dim())?;
        Ok(SymForm {
            m: &self.m * t + &other.m * (1.0 - t),
        })
    }

    pub fn sub(&self, other: &SymForm) -> Result<SymForm> {
        check_dim(self.dim(), other.dim())?;
        Ok(SymForm {
            m: &self.m - &other.m,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.m)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_radius(&self.m)
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|v| *v == 0.0)
    }

    /// Rows as nested vectors, for serialization.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.m)
    }
}

/// A positive-definite [`SymForm`] with its smallest eigenvalue as witness.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProduct {
    form: SymForm,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl InnerProduct {
    pub fn new(form: SymForm) -> Result<Self> {
        let vals = form.matrix().symmetric_eigenvalues();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0 && min > PD_TOL * max) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(InnerProduct {
            form,
            min_eigenvalue: min,
            max_eigenvalue: max,
        })
    }

    pub fn identity(n: usize) -> Self {
        InnerProduct {
            form: SymForm::identity(n),
            min_eigenvalue: 1.0,
            max_eigenvalue: 1.0,
        }
    }

    pub fn form(&self) -> &SymForm {
        &self.form
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.form.matrix()
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue / self.min_eigenvalue
    }
}

/// `ℝⁿ` with `‖x‖ = √max(Π₁(x,x), Π₂(x,x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoEllipsoidSpace {
    pi1: InnerProduct,
    pi2: InnerProduct,
}

impl TwoEllipsoidSpace {
    pub fn new(pi1: InnerProduct, pi2: InnerProduct) -> Result<Self> {
        check_dim(pi1.dim(), pi2.dim())?;
        Ok(TwoEllipsoidSpace { pi1, pi2 })
    }

    pub fn euclidean(n: usize) -> Self {
        TwoEllipsoidSpace {
            pi1: InnerProduct::identity(n),
            pi2: InnerProduct::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.pi1.dim()
    }

    pub fn pi1(&self) -> &InnerProduct {
        &self.pi1
    }

    pub fn pi2(&self) -> &InnerProduct {
        &self.pi2
    }

    /// `√max(Π₁(x,x), Π₂(x,x))`.
    pub fn max_norm(&self, x: &DVector<f64>) -> Result<f64> {
        let a = self.pi1.form().evaluate(x)?;
        let b = self.pi2.form().evaluate(x)?;
        Ok(a.max(b).max(0.0).sqrt())
    }

    /// Restriction of both inner products to `sub`, in its basis coordinates.
    pub fn restrict(&self, sub: &Subspace) -> Result<TwoEllipsoidSpace> {
        TwoEllipsoidSpace::new(
            InnerProduct::new(gram_restrict(self.pi1.form(), sub)?)?,
            InnerProduct::new(gram_restrict(self.pi2.form(), sub)?)?,
        )
    }
}

/// A subspace `Y ⊆ ℝⁿ` given by `k` linearly independent basis rows.
///
/// Zero-dimensional subspaces (`k = 0`) exist only as results of internal
/// constructions (empty eigenspace splits, empty intersections); [`Subspace::new`]
/// requires `k ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (k, n) = basis.shape();
        if n == 0 || k == 0 || k > n {
            return Err(Error::InvalidInput(format!(
                "subspace basis must be k x n with 1 <= k <= n, got {k}x{n}"
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("subspace basis has non-finite entries".into()));
        }
        let (smallest, largest) = linalg::singular_extremes(&basis);
        if !(largest > 0.0 && smallest > linalg::RANK_TOL * largest) {
            return Err(Error::RankDeficient { smallest, largest });
        }
        Ok(Subspace { basis })
    }

    pub fn from_rows(rows: &[Vec<f64>], n: usize) -> Result<Self> {
        Self::new(matrix_from_rows(rows, n)?)
    }

    /// Wraps rows that are already orthonormal; `k = 0` allowed.
    pub(crate) fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Subspace { basis }
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: DMatrix::zeros(0, n),
        }
    }

    pub fn whole(n: usize) -> Self {
        Subspace {
            basis: DMatrix::identity(n, n),
        }
    }

    /// Span of the first `k` standard basis vectors of `ℝⁿ`.
    pub fn leading(k: usize, n: usize) -> Self {
        Subspace {
            basis: DMatrix::identity(k, n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        self.basis.row(i).transpose()
    }

    /// Same span, Euclidean-orthonormal rows.
    pub fn orthonormalized(&self) -> Subspace {
        Subspace {
            basis: linalg::orthonormal_rows(&self.basis, linalg::RANK_TOL),
        }
    }

    /// Euclidean orthogonal complement as orthonormal rows.
    pub fn euclidean_complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::whole(self.ambient_dim());
        }
        Subspace {
            basis: linalg::nullspace(&self.basis, linalg::RANK_TOL),
        }
    }

    /// `x = Uᵀc` for coordinates `c`.
    pub fn point(&self, coords: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), coords.len())?;
        Ok(self.basis.transpose() * coords)
    }

    /// The `k×n` map `K = (UUᵀ)⁻¹U`, which returns the coordinates of any
    /// vector of the subspace (least-squares coordinates elsewhere).
    pub fn coordinate_map(&self) -> DMatrix<f64> {
        let gram = &self.basis * self.basis.transpose();
        let chol = gram
            .cholesky()
            .expect("basis of a validated subspace has a positive-definite Gram matrix");
        chol.solve(&self.basis)
    }

    /// Euclidean distance of `x` from the subspace.
    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        if self.dim() == 0 {
            return x.norm();
        }
        let q = self.orthonormalized();
        let proj = q.basis.transpose() * (&q.basis * x);
        (x - proj).norm()
    }

    /// Maps a subspace given in this subspace's coordinates to ambient
    /// coordinates: rows `c` become `cᵀU`.
    pub fn push_forward(&self, inner: &Subspace) -> Result<Subspace> {
        check_dim(self.dim(), inner.ambient_dim())?;
        if inner.dim() == 0 {
            return Ok(Subspace::zero(self.ambient_dim()));
        }
        Ok(Subspace {
            basis: &inner.basis * &self.basis,
        }
        .orthonormalized())
    }
}

/// A 2-polynomial on a subspace, as a `k×k` form in the subspace's basis
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadOnSubspace {
    subspace: Subspace,
    form: SymForm,
}

impl QuadOnSubspace {
    pub fn new(subspace: Subspace, form: SymForm) -> Result<Self> {
        check_dim(subspace.dim(), form.dim())?;
        Ok(QuadOnSubspace { subspace, form })
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn form(&self) -> &SymForm {
        &self.form
    }

    pub fn scaled(&self, t: f64) -> QuadOnSubspace {
        QuadOnSubspace {
            subspace: self.subspace.clone(),
            form: self.form.scaled(t),
        }
    }

    /// The same polynomial pushed to ambient coordinates: `KᵀBK` with `K`
    /// the coordinate map. Agrees with `P` on the subspace and vanishes on
    /// its Euclidean complement.
    pub fn ambient_form(&self) -> SymForm {
        let k = self.subspace.coordinate_map();
        SymForm {
            m: linalg::symmetrize(&(k.transpose() * self.form.matrix() * &k)),
        }
    }
}

/// `xᵀBx`.
pub fn evaluate_form(b: &SymForm, x: &DVector<f64>) -> Result<f64> {
    b.evaluate(x)
}

/// `√max(Π₁(x,x), Π₂(x,x))`.
pub fn max_norm(space: &TwoEllipsoidSpace, x: &DVector<f64>) -> Result<f64> {
    space.max_norm(x)
}

/// Pulls `A` back to subspace coordinates: `U A Uᵀ`.
pub fn gram_restrict(a: &SymForm, sub: &Subspace) -> Result<SymForm> {
    check_dim(a.dim(), sub.ambient_dim())?;
    let u = sub.basis();
    SymForm::new(u * a.matrix() * u.transpose())
}

/// The ambient form `x ↦ Bk(K·Πx)` where `K` is the coordinate map of `sub`
/// and `Π` a projector onto `sub`.
pub fn embed_form(bk: &SymForm, sub: &Subspace, projector: &DMatrix<f64>) -> Result<SymForm> {
    check_dim(sub.dim(), bk.dim())?;
    let n = sub.ambient_dim();
    if projector.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: projector.nrows(),
        });
    }
    let map = sub.coordinate_map() * projector;
    SymForm::new(map.transpose() * bk.matrix() * map)
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<DMatrix<f64>> {
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
