//! Dense helpers shared by every module: sorted symmetric eigendecomposition,
//! SVD-based rank, nullspace and orthonormalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue magnitude of a symmetric matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Singular values in descending order with the matching right singular
/// vectors as rows of a full `c×c` matrix (the input is zero-padded when it
/// has fewer rows than columns).
fn full_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let values = order.iter().map(|&i| sv[i]).collect();
    let rows = DMatrix::from_fn(c, c, |i, j| v_t[(order[i], j)]);
    (values, rows)
}

/// Numerical rank with cutoff `σ > tol·σ_max`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let largest = sv.iter().copied().fold(0.0f64, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Extreme singular values `(smallest, largest)` over the `min(r, c)` values.
pub fn singular_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.singular_values();
    let largest = sv.iter().copied().fold(0.0f64, f64::max);
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    (smallest, largest)
}

/// Orthonormal rows spanning `{x : M x = 0}`.
pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    if m.nrows() == 0 || m.iter().all(|v| *v == 0.0) {
        return DMatrix::identity(c, c);
    }
    let (sv, v_t) = full_svd(m);
    let largest = sv.first().copied().unwrap_or(0.0);
    let r = sv.iter().filter(|&&s| s > tol * largest).count();
    v_t.rows(r, c - r).into_owned()
}

/// Orthonormal rows spanning the row space of `m`.
pub fn orthonormal_rows(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    if m.nrows() == 0 || m.iter().all(|v| *v == 0.0) {
        return DMatrix::zeros(0, c);
    }
    let (sv, v_t) = full_svd(m);
    let largest = sv[0];
    let r = sv.iter().filter(|&&s| s > tol * largest).count();
    v_t.rows(0, r).into_owned()
}

/// Stacks the rows of `a` on top of the rows of `b`.
pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub fn quad(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (x.transpose() * m * x)[(0, 0)]
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
