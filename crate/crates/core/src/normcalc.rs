//! `‖P‖ = sup |P(x)| / max(Π₁(x,x), Π₂(x,x))` through the sandwich
//! characterization: `‖P‖ ≤ c` exactly when both pencils
//! `c(αA₁+(1−α)A₂) ∓ B` admit a positive-semidefinite member. Feasibility is
//! monotone in `c`, so the norm is found by bisection.
//!
//! All work happens in congruence-normalized coordinates where
//! `(A₁+A₂)/2 = I` and `B` has unit spectral norm; the result is scaled back.
//! This makes the absolute pencil tolerance meaningful whatever the scale or
//! orientation of the input.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::form::{gram_restrict, InnerProduct, QuadOnSubspace, SymForm, TwoEllipsoidSpace};
use crate::linalg;
use crate::pencil::{Pencil, SandwichCertificate};
use crate::verify::sample_norm_lower_bound;

/// Relative bracket width at which bisection stops.
pub const REL_WIDTH: f64 = 1e-10;

/// Bisection iteration cap; hitting it is an internal error.
pub const MAX_BISECTIONS: usize = 200;

/// Feasibility tolerance (normalized coordinates) used while bisecting.
const BISECT_TOL: f64 = 1e-12;

/// Forms whose normalized size falls below this are reported as zero.
const ZERO_CUTOFF: f64 = 1e-12;

const BRACKET_SAMPLES: usize = 256;
const BRACKET_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    /// Midpoint of the final bisection bracket.
    pub value: f64,
    /// Upper end of the bracket; the certificate is valid at this scale.
    pub upper: f64,
    pub certificate: SandwichCertificate,
    /// A vector whose ratio `|P(x)|/‖x‖²` is close to `value`.
    pub lower_witness: DVector<f64>,
    pub witness_ratio: f64,
    pub iterations: usize,
}

impl NormResult {
    fn zero(n: usize) -> Self {
        let mut w = DVector::zeros(n);
        w[0] = 1.0;
        NormResult {
            value: 0.0,
            upper: 0.0,
            certificate: SandwichCertificate {
                alpha: 0.5,
                beta: 0.5,
                alpha_interval: (0.0, 1.0),
                beta_interval: (0.0, 1.0),
            },
            lower_witness: w,
            witness_ratio: 0.0,
            iterations: 0,
        }
    }
}

/// Whether `|B(x)| ≤ c·max(A₁(x), A₂(x))` holds for every `x`, decided by the
/// two pencils at tolerance `tol`.
pub fn sandwich_feasible(b: &SymForm, a1: &SymForm, a2: &SymForm, c: f64, tol: f64) -> Result<bool> {
    check_dim(a1.dim(), a2.dim())?;
    check_dim(a1.dim(), b.dim())?;
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("scale c must be positive, got {c}")));
    }
    Ok(feasible_at(b.matrix(), &(a1.matrix() * c), &(a2.matrix() * c), tol))
}

fn feasible_at(b: &DMatrix<f64>, ca1: &DMatrix<f64>, ca2: &DMatrix<f64>, tol: f64) -> bool {
    Pencil::sandwich(ca1, ca2, b, 1.0).feasible(tol) && Pencil::sandwich(ca1, ca2, b, -1.0).feasible(tol)
}

/// `max |λ|` over the generalized eigenvalues of `(B, A)`: the norm of `B`
/// when the unit ball is the single ellipsoid `A(x) ≤ 1`.
pub fn single_ellipsoid_norm(b: &SymForm, a: &InnerProduct) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(reduced_radius(b.matrix(), a.matrix()))
}

fn reduced_radius(b: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    linalg::spectral_radius(&congruence(b, a).0)
}

/// `(L⁻¹BL⁻ᵀ, L)` with `A = LLᵀ`.
fn congruence(b: &DMatrix<f64>, a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let l = a.clone().cholesky().expect("positive definite").l();
    let left = l
        .solve_lower_triangular(b)
        .expect("cholesky factor is invertible");
    let both = l
        .solve_lower_triangular(&left.transpose())
        .expect("cholesky factor is invertible");
    (linalg::symmetrize(&both), l)
}

fn ratio(b: &DMatrix<f64>, a1: &DMatrix<f64>, a2: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let den = linalg::quad(a1, y).max(linalg::quad(a2, y));
    if den > 0.0 {
        linalg::quad(b, y).abs() / den
    } else {
        0.0
    }
}

/// The norm of `B` on `(ℝⁿ, √max(A₁, A₂))`, with its sandwich certificate and a
/// near-extremal witness.
pub fn polynomial_norm(b: &SymForm, a1: &InnerProduct, a2: &InnerProduct, tol: f64) -> Result<NormResult> {
    check_dim(a1.dim(), a2.dim())?;
    check_dim(a1.dim(), b.dim())?;
    let n = b.dim();

    let avg = (a1.matrix() + a2.matrix()) * 0.5;
    let (a1c, l) = congruence(a1.matrix(), &avg);
    let (a2c, _) = congruence(a2.matrix(), &avg);
    let (bc, _) = congruence(b.matrix(), &avg);
    let b_scale = linalg::spectral_radius(&bc);
    if b.is_zero() || b_scale <= ZERO_CUTOFF {
        return Ok(NormResult::zero(n));
    }
    let bn = &bc / b_scale;

    // Upper bound: one ellipsoid alone already bounds the norm.
    let mut hi = reduced_radius(&bn, &a1c).min(reduced_radius(&bn, &a2c)) * (1.0 + 1e-12);
    if !feasible_at(&bn, &(&a1c * hi), &(&a2c * hi), BISECT_TOL) {
        hi *= 1.0 + 1e-9;
    }

    // Lower bound: realized ratios at a top eigenvector of B and at samples.
    let (_, vecs) = linalg::sym_eigen(&bn);
    let top = [vecs.column(0).into_owned(), vecs.column(n - 1).into_owned()]
        .into_iter()
        .max_by(|u, v| ratio(&bn, &a1c, &a2c, u).total_cmp(&ratio(&bn, &a1c, &a2c, v)))
        .expect("two candidates");
    let mut lo = ratio(&bn, &a1c, &a2c, &top);
    let sampled = sample_norm_lower_bound(
        &SymForm::new(bn.clone())?,
        &InnerProduct::new(SymForm::new(a1c.clone())?)?,
        &InnerProduct::new(SymForm::new(a2c.clone())?)?,
        BRACKET_SAMPLES,
        BRACKET_SEED,
    );
    lo = lo.max(sampled.0).min(hi);

    let mut iterations = 0;
    while hi - lo > REL_WIDTH * lo {
        if iterations == MAX_BISECTIONS {
            return Err(Error::Internal(format!(
                "norm bisection did not converge in {MAX_BISECTIONS} iterations (bracket [{lo}, {hi}])"
            )));
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if feasible_at(&bn, &(&a1c * mid), &(&a2c * mid), BISECT_TOL) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let value_n = 0.5 * (lo + hi);

    let upper_pencil = Pencil::sandwich(&(&a1c * hi), &(&a2c * hi), &bn, 1.0);
    let lower_pencil = Pencil::sandwich(&(&a1c * hi), &(&a2c * hi), &bn, -1.0);
    let up = upper_pencil.interval(tol.max(BISECT_TOL));
    let low = lower_pencil.interval(tol.max(BISECT_TOL));
    if up.empty || low.empty {
        return Err(Error::Internal(format!(
            "certificate lost at the feasible scale {hi} (peaks {:e}, {:e})",
            up.peak_value, low.peak_value
        )));
    }
    let certificate = SandwichCertificate {
        alpha: 0.5 * (up.lo + up.hi),
        beta: 0.5 * (low.lo + low.hi),
        alpha_interval: (up.lo, up.hi),
        beta_interval: (low.lo, low.hi),
    };

    // Witness candidates in normalized coordinates.
    let mut best = (ratio(&bn, &a1c, &a2c, &top), top);
    let mut consider = |y: DVector<f64>| {
        let r = ratio(&bn, &a1c, &a2c, &y);
        if r > best.0 {
            best = (r, y);
        }
    };
    consider(sampled.1.clone());
    for a in [&a1c, &a2c] {
        let (reduced, lf) = congruence(&bn, a);
        let (_, w) = linalg::sym_eigen(&reduced);
        for j in [0, n - 1] {
            let y = lf
                .transpose()
                .solve_upper_triangular(&w.column(j).into_owned())
                .expect("cholesky factor is invertible");
            consider(y);
        }
    }
    for (pencil, alpha) in [(&upper_pencil, up.peak_alpha), (&lower_pencil, low.peak_alpha)] {
        consider(null_plane_witness(&pencil.at(alpha), &bn, &a1c, &a2c));
    }
    let (ratio_n, y) = best;

    // Back to original coordinates: x = L⁻ᵀ y.
    let x = l
        .transpose()
        .solve_upper_triangular(&y)
        .expect("cholesky factor is invertible");
    let x = &x / x.norm();
    let witness_ratio = ratio(b.matrix(), a1.matrix(), a2.matrix(), &x);

    debug_assert!(ratio_n.is_finite());
    Ok(NormResult {
        value: value_n * b_scale,
        upper: hi * b_scale,
        certificate,
        lower_witness: x,
        witness_ratio,
        iterations,
    })
}

/// Best ratio over the plane of the two lowest eigenvectors of a tight pencil
/// member. At the norm, the maximizer lies in the pencil's null space, which
/// is one- or two-dimensional at a generic kink.
fn null_plane_witness(
    pencil: &DMatrix<f64>,
    b: &DMatrix<f64>,
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
) -> DVector<f64> {
    let (_, vecs) = linalg::sym_eigen(pencil);
    let u = vecs.column(0).into_owned();
    if vecs.ncols() < 2 {
        return u;
    }
    let v = vecs.column(1).into_owned();
    let at = |t: f64| &u * t.cos() + &v * t.sin();
    const STEPS: usize = 720;
    let step = std::f64::consts::PI / STEPS as f64;
    let (imax, _) = (0..STEPS)
        .map(|i| (i, ratio(b, a1, a2, &at(i as f64 * step))))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty scan");
    let left = (imax as f64 - 1.0) * step;
    let (s, _) = crate::pencil::maximize_concave_on_unit_interval(
        |s| ratio(b, a1, a2, &at(left + 2.0 * step * s)),
        1e-12,
    );
    let refined = at(left + 2.0 * step * s);
    let grid_best = at(imax as f64 * step);
    if ratio(b, a1, a2, &refined) >= ratio(b, a1, a2, &grid_best) {
        refined
    } else {
        grid_best
    }
}

/// Norm of a 2-polynomial on a subspace with the restricted two-ellipsoid
/// norm. The witness is returned in ambient coordinates.
pub fn norm_on_subspace(p: &QuadOnSubspace, space: &TwoEllipsoidSpace, tol: f64) -> Result<NormResult> {
    check_dim(space.dim(), p.subspace().ambient_dim())?;
    let g1 = InnerProduct::new(gram_restrict(space.pi1().form(), p.subspace())?)?;
    let g2 = InnerProduct::new(gram_restrict(space.pi2().form(), p.subspace())?)?;
    let mut res = polynomial_norm(p.form(), &g1, &g2, tol)?;
    let x = p.subspace().point(&res.lower_witness)?;
    res.lower_witness = &x / x.norm();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::Subspace;
    use crate::DEFAULT_TOL;

    fn ip(d: &[f64]) -> InnerProduct {
        InnerProduct::new(SymForm::diagonal(d)).unwrap()
    }

    /// Dense angular scan of (x²+y²)/max(4x²+y², x²+4y²).
    fn angular_oracle() -> f64 {
        (0..200_000)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 200_000.0;
                let (x, y) = (t.cos(), t.sin());
                (x * x + y * y) / (4.0 * x * x + y * y).max(x * x + 4.0 * y * y)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn sandwich_feasible_examples() {
        let i = SymForm::identity(2);
        assert!(sandwich_feasible(&i, &i, &i, 1.0, DEFAULT_TOL).unwrap());
        assert!(!sandwich_feasible(&i, &i, &i, 0.5, DEFAULT_TOL).unwrap());
        let a1 = SymForm::diagonal(&[4.0, 1.0]);
        let a2 = SymForm::diagonal(&[1.0, 4.0]);
        assert!(sandwich_feasible(&i, &a1, &a2, 0.4, DEFAULT_TOL).unwrap());
        assert!(!sandwich_feasible(&i, &a1, &a2, 0.39, DEFAULT_TOL).unwrap());
        assert!(sandwich_feasible(&i, &a1, &a2, 0.0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn polynomial_norm_examples() {
        let e = ip(&[1.0, 1.0]);
        let r = polynomial_norm(&SymForm::diagonal(&[3.0, -1.0]), &e, &e, DEFAULT_TOL).unwrap();
        assert!((r.value - 3.0).abs() < 3e-8);

        let r = polynomial_norm(&SymForm::zeros(2), &e, &e, DEFAULT_TOL).unwrap();
        assert_eq!(r.value, 0.0);

        let truth = angular_oracle();
        assert!((truth - 0.4).abs() < 1e-9);
        let r = polynomial_norm(&SymForm::identity(2), &ip(&[4.0, 1.0]), &ip(&[1.0, 4.0]), DEFAULT_TOL).unwrap();
        assert!((r.value - truth).abs() < 1e-8, "{}", r.value);
        assert!(r.witness_ratio >= r.value * (1.0 - 1e-3));
        assert!((r.certificate.alpha - 0.5).abs() < 1e-6);
    }

    #[test]
    fn certificate_holds_at_upper_scale() {
        let a1 = ip(&[4.0, 1.0]);
        let a2 = ip(&[1.0, 4.0]);
        let b = SymForm::from_rows(&[vec![1.0, 0.3], vec![0.3, -0.5]]).unwrap();
        let r = polynomial_norm(&b, &a1, &a2, DEFAULT_TOL).unwrap();
        let c = r.value * (1.0 + 10.0 * DEFAULT_TOL);
        let (up, lo) = r
            .certificate
            .pencil_min_eigs(&a1.form().scaled(c), &a2.form().scaled(c), &b)
            .unwrap();
        assert!(up >= -1e-9 && lo >= -1e-9, "{up} {lo}");
    }

    #[test]
    fn norm_on_subspace_examples() {
        let e1 = Subspace::from_rows(&[vec![1.0, 0.0]], 2).unwrap();
        let p = QuadOnSubspace::new(e1, SymForm::from_rows(&[vec![-2.5]]).unwrap()).unwrap();
        let r = norm_on_subspace(&p, &TwoEllipsoidSpace::euclidean(2), DEFAULT_TOL).unwrap();
        assert!((r.value - 2.5).abs() < 1e-7);

        let diag = Subspace::from_rows(&[vec![1.0, 1.0]], 2).unwrap();
        let p = QuadOnSubspace::new(diag, SymForm::from_rows(&[vec![3.0]]).unwrap()).unwrap();
        let space = TwoEllipsoidSpace::new(ip(&[2.0, 1.0]), ip(&[1.0, 2.0])).unwrap();
        let r = norm_on_subspace(&p, &space, DEFAULT_TOL).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
        assert_eq!(r.lower_witness.len(), 2);
        assert!((r.lower_witness[0] - r.lower_witness[1]).abs() < 1e-12);
    }

    #[test]
    fn scaling_equivariance() {
        let a1 = ip(&[3.0, 1.0, 2.0]);
        let a2 = InnerProduct::new(
            SymForm::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.5, 1.0, 0.2], vec![0.0, 0.2, 4.0]]).unwrap(),
        )
        .unwrap();
        let b = SymForm::from_rows(&[vec![1.0, 2.0, -1.0], vec![2.0, 0.0, 0.5], vec![-1.0, 0.5, -2.0]]).unwrap();
        let base = polynomial_norm(&b, &a1, &a2, DEFAULT_TOL).unwrap().value;
        for t in [1e-6, 0.3, 7.0, 1e5] {
            let v = polynomial_norm(&b.scaled(t), &a1, &a2, DEFAULT_TOL).unwrap().value;
            assert!((v - t * base).abs() <= 1e-7 * t * base, "t = {t}");
        }
    }
}
