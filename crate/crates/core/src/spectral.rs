//! Representing operators of a bilinear form with respect to an inner
//! product, their sign splits, and inner-product orthogonal complements.
//!
//! For a Gram matrix `G` and a form `B` on the same coordinates the operator
//! `T = G⁻¹B` satisfies `Π(u, v) = Π_G(u, T v)`. It is computed through the
//! Cholesky reduction `G = LLᵀ`, `C = L⁻¹BL⁻ᵀ`, so the spectrum is real and
//! the eigenvectors come out `G`-orthonormal by construction.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::form::{InnerProduct, Subspace, SymForm};
use crate::linalg::{self, RANK_TOL};

/// Relative cutoff for calling an eigenvalue zero.
pub const ZERO_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentingOperator {
    /// `T` in coordinates; not symmetric in general.
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns, `G`-orthonormal, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub form: DMatrix<f64>,
}

impl RepresentingOperator {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |G·T − B|`.
    pub fn defining_residual(&self) -> f64 {
        linalg::max_abs(&(&self.gram * &self.matrix - &self.form))
    }

    /// `max |VᵀGV − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.dim();
        let v = &self.eigenvectors;
        linalg::max_abs(&(v.transpose() * &self.gram * v - DMatrix::identity(k, k)))
    }

    /// `1e-9 · max |λ|`.
    pub fn default_zero_tol(&self) -> f64 {
        ZERO_REL_TOL * self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Where eigenvalues within `zero_tol` of zero go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPolicy {
    #[default]
    NonNegative,
    Negative,
}

/// `Y = nonneg ⊕ neg`, both in the operator's coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSplit {
    pub nonneg: Subspace,
    pub neg: Subspace,
    pub nonneg_eigenvalues: Vec<f64>,
    pub neg_eigenvalues: Vec<f64>,
    /// Eigenvalues with `|λ| ≤ zero_tol`, wherever they were assigned.
    pub zero_count: usize,
}

impl EigenSplit {
    /// The split pushed to ambient coordinates through the basis of `y`.
    pub fn in_ambient(&self, y: &Subspace) -> Result<EigenSplit> {
        Ok(EigenSplit {
            nonneg: y.push_forward(&self.nonneg)?,
            neg: y.push_forward(&self.neg)?,
            nonneg_eigenvalues: self.nonneg_eigenvalues.clone(),
            neg_eigenvalues: self.neg_eigenvalues.clone(),
            zero_count: self.zero_count,
        })
    }
}

/// Solves `Bv = λGv` by the definite reduction and returns `T = G⁻¹B` with
/// its real spectrum and `G`-orthonormal eigenvectors.
pub fn representing_operator(g: &InnerProduct, b: &SymForm) -> Result<RepresentingOperator> {
    check_dim(g.dim(), b.dim())?;
    let gram = g.matrix().clone();
    let chol = gram.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: g.min_eigenvalue(),
        max_eigenvalue: g.max_eigenvalue(),
    })?;
    let l = chol.l();
    let half = l
        .solve_lower_triangular(b.matrix())
        .ok_or_else(|| Error::Internal("singular Cholesky factor".into()))?;
    let reduced = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::Internal("singular Cholesky factor".into()))?;
    let (eigenvalues, w) = linalg::sym_eigen(&linalg::symmetrize(&reduced));
    let eigenvectors = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or_else(|| Error::Internal("singular Cholesky factor".into()))?;
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&eigenvalues));
    let matrix = &eigenvectors * lambda * eigenvectors.transpose() * &gram;
    Ok(RepresentingOperator {
        matrix,
        eigenvalues,
        eigenvectors,
        gram,
        form: b.matrix().clone(),
    })
}

/// Non-negative / negative eigenspaces; eigenvalues `λ ≥ −zero_tol` count as
/// non-negative.
pub fn split_eigenspaces(op: &RepresentingOperator, zero_tol: f64) -> EigenSplit {
    split_eigenspaces_with(op, zero_tol, ZeroPolicy::NonNegative)
}

pub fn split_eigenspaces_with(op: &RepresentingOperator, zero_tol: f64, policy: ZeroPolicy) -> EigenSplit {
    let k = op.dim();
    let is_nonneg = |l: f64| match policy {
        ZeroPolicy::NonNegative => l >= -zero_tol,
        ZeroPolicy::Negative => l > zero_tol,
    };
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| is_nonneg(op.eigenvalues[i]));
    let take = |idx: &[usize]| {
        let rows = DMatrix::from_fn(idx.len(), k, |r, c| op.eigenvectors[(c, idx[r])]);
        Subspace::from_orthonormal(if idx.is_empty() {
            rows
        } else {
            linalg::orthonormal_rows(&rows, RANK_TOL)
        })
    };
    EigenSplit {
        nonneg: take(&pos),
        neg: take(&neg),
        nonneg_eigenvalues: pos.iter().map(|&i| op.eigenvalues[i]).collect(),
        neg_eigenvalues: neg.iter().map(|&i| op.eigenvalues[i]).collect(),
        zero_count: op.eigenvalues.iter().filter(|l| l.abs() <= zero_tol).count(),
    }
}

/// `{z : Π_A(z, x) = 0 for all x ∈ sub}` as orthonormal rows: the nullspace
/// of `U·A`.
pub fn orthogonal_complement(a: &InnerProduct, sub: &Subspace) -> Result<Subspace> {
    check_dim(a.dim(), sub.ambient_dim())?;
    if sub.dim() == 0 {
        return Ok(Subspace::whole(a.dim()));
    }
    let constraints = sub.basis() * a.matrix();
    let (smallest, largest) = linalg::singular_extremes(&constraints);
    if !(largest > 0.0 && smallest > RANK_TOL * largest) {
        return Err(Error::RankDeficient { smallest, largest });
    }
    Ok(Subspace::from_orthonormal(linalg::nullspace(&constraints, RANK_TOL)))
}

/// `S₁ ∩ S₂` as orthonormal rows, possibly zero-dimensional.
pub fn subspace_intersection(s1: &Subspace, s2: &Subspace) -> Result<Subspace> {
    check_dim(s1.ambient_dim(), s2.ambient_dim())?;
    let n = s1.ambient_dim();
    if s1.dim() == 0 || s2.dim() == 0 {
        return Ok(Subspace::zero(n));
    }
    let constraints = linalg::vstack(s1.euclidean_complement().basis(), s2.euclidean_complement().basis());
    Ok(Subspace::from_orthonormal(linalg::nullspace(&constraints, RANK_TOL)))
}
