//! Norm-preserving extension of a 2-polynomial from a subspace to the whole
//! two-ellipsoid space.
//!
//! One hyperplane step, for `P` of norm at most 1 on a hyperplane `Y`:
//!
//! 1. find the sandwich `−(βΠ₁+(1−β)Π₂) ≤ P ≤ αΠ₁+(1−α)Π₂` on `Y` and switch
//!    to the renormalized inner products `Π₁' = αΠ₁+(1−α)Π₂`,
//!    `Π₂' = βΠ₁+(1−β)Π₂`, which satisfy `−Π₂' ≤ P ≤ Π₁'` on `Y`;
//! 2. split `Y = Y₁ ⊕ Y₂` by the sign of the spectrum of the representing
//!    operator of `P` on `(Y, Π₁')`, and `Y = Y₃ ⊕ Y₄` likewise for `Π₂'`;
//! 3. take `z ≠ 0` with `Π₁'(z, Y₁) = 0` and `Π₂'(z, Y₄) = 0`;
//! 4. extend by `P̃(x) = P(x − φ(x)/φ(z)·z)` where `ker φ = Y`.
//!
//! Writing `x − φ(x)/φ(z)·z = y₁ + y₂`, `P̃(x) = P(y₁) + P(y₂) ≤ Π₁'(y₁,y₁) ≤
//! Π₁'(x,x) ≤ ‖x‖²` because `y₁` is `Π₁'`-orthogonal to both `y₂` and `z`; the
//! lower bound is symmetric through `Y₃`, `Y₄` and `Π₂'`.
//!
//! In exact arithmetic `M₁ ∩ M₂ ∩ Y = {0}` (such a vector would lie in
//! `Y₂ ∩ Y₃`), so `φ(z) ≠ 0`; a vanishing `φ(z)` is a numerical event and is
//! reported as [`Error::DegenerateZ`].
//!
//! General subspaces are handled by a flag `Y = W_k ⊂ … ⊂ W_n = ℝⁿ`, one
//! hyperplane step per level, each in the coordinates of `W_{j+1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::form::{embed_form, gram_restrict, InnerProduct, QuadOnSubspace, Subspace, SymForm, TwoEllipsoidSpace};
use crate::linalg;
use crate::normcalc::{norm_on_subspace, polynomial_norm, NormResult};
use crate::pencil::{dominating_combination, SandwichCertificate};
use crate::spectral::{
    orthogonal_complement, representing_operator, split_eigenspaces_with, subspace_intersection, EigenSplit,
    ZeroPolicy,
};

/// Minimum `|φ(z)| / (‖φ‖‖z‖)` accepted for the extension direction.
pub const Z_TOL: f64 = 1e-8;

/// Restriction agreement required of the final report.
pub const AGREEMENT_TOL: f64 = 1e-9;

/// Allowed relative growth of the norm in the final report.
pub const NORM_REL_TOL: f64 = 1e-6;

/// Headroom applied when normalizing `P` so the sandwich is strictly feasible.
const SCALE_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtendOptions {
    /// On a degenerate `z`, retry once with the zero eigenvalues moved to the
    /// negative side of both splits.
    pub zero_retry: bool,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions { zero_retry: true }
    }
}

/// Subspace dimensions met in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitDims {
    pub y1: usize,
    pub y2: usize,
    pub y3: usize,
    pub y4: usize,
    pub m1: usize,
    pub m2: usize,
    pub intersection: usize,
}

/// Everything one hyperplane step built, in the coordinates of its ambient
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneStep {
    pub ambient: TwoEllipsoidSpace,
    pub subspace: Subspace,
    /// The form being extended, in the basis of `subspace`.
    pub form: SymForm,
    pub phi: DVector<f64>,
    pub z: DVector<f64>,
    pub phi_z: f64,
    /// `I − z·φᵀ/φ(z)`.
    pub projector: DMatrix<f64>,
    pub renorm: SandwichCertificate,
    pub renorm_pi1: InnerProduct,
    pub renorm_pi2: InnerProduct,
    pub y1: Subspace,
    pub y2: Subspace,
    pub y3: Subspace,
    pub y4: Subspace,
    pub m1: Subspace,
    pub m2: Subspace,
    pub dims: SplitDims,
    pub zeros_t1: usize,
    pub zeros_t2: usize,
    pub retried: bool,
    /// The extended form on `ambient`.
    pub extended: SymForm,
    /// Orthonormal rows mapping step coordinates to the original space
    /// (filled in by [`extend`]; identity for a standalone step).
    pub to_ambient: DMatrix<f64>,
}

impl HyperplaneStep {
    /// `z` in original ambient coordinates.
    pub fn z_ambient(&self) -> DVector<f64> {
        self.to_ambient.transpose() * &self.z
    }

    pub fn phi_ambient(&self) -> DVector<f64> {
        self.to_ambient.transpose() * &self.phi
    }

    /// Largest condition number of the two renormalized inner products.
    pub fn renorm_condition(&self) -> f64 {
        self.renorm_pi1.condition_number().max(self.renorm_pi2.condition_number())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    pub extended: SymForm,
    pub original_norm: NormResult,
    pub extended_norm: NormResult,
    pub steps: Vec<HyperplaneStep>,
    /// Max over basis pairs of `|uᵀB̃v − P(u,v)|`, divided by `max(1, max|P|)`.
    pub agreement_residual: f64,
}

impl ExtensionReport {
    /// Checks the extension and norm-preservation bounds.
    pub fn check(&self) -> Result<()> {
        if !(self.agreement_residual <= AGREEMENT_TOL) {
            return Err(Error::VerificationFailed(format!(
                "restriction residual {:e} exceeds {AGREEMENT_TOL:e}",
                self.agreement_residual
            )));
        }
        let bound = self.original_norm.value * (1.0 + NORM_REL_TOL) + 1e-9;
        if !(self.extended_norm.value <= bound) {
            return Err(Error::VerificationFailed(format!(
                "extended norm {} exceeds original norm {} beyond tolerance",
                self.extended_norm.value, self.original_norm.value
            )));
        }
        Ok(())
    }
}

/// `Π₁' = αΠ₁+(1−α)Π₂` and `Π₂' = βΠ₁+(1−β)Π₂` on the ambient space, after
/// checking that they sandwich `P` on its subspace.
pub fn renormalize(
    space: &TwoEllipsoidSpace,
    p: &QuadOnSubspace,
    cert: &SandwichCertificate,
    tol: f64,
) -> Result<(InnerProduct, InnerProduct)> {
    check_dim(space.dim(), p.subspace().ambient_dim())?;
    for (name, t) in [("alpha", cert.alpha), ("beta", cert.beta)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("{name} = {t} outside [0, 1]")));
        }
    }
    let pi1 = space.pi1().form();
    let pi2 = space.pi2().form();
    let a1 = InnerProduct::new(pi1.combine(pi2, cert.alpha)?)?;
    let a2 = InnerProduct::new(pi1.combine(pi2, cert.beta)?)?;

    let g1 = gram_restrict(a1.form(), p.subspace())?;
    let g2 = gram_restrict(a2.form(), p.subspace())?;
    let upper = g1.sub(p.form())?.min_eigenvalue();
    let lower = linalg::min_eigenvalue(&(g2.matrix() + p.form().matrix()));
    let slack = 2.0 * tol + 1e-13 * g1.spectral_norm().max(g2.spectral_norm());
    if upper < -slack || lower < -slack {
        return Err(Error::VerificationFailed(format!(
            "renormalization certificate fails: min eigenvalues {upper:e} (upper), {lower:e} (lower)"
        )));
    }
    Ok((a1, a2))
}

/// A unit vector of `M₁ ∩ M₂` maximizing `|φ(z)|`.
pub fn find_z(m1: &Subspace, m2: &Subspace, phi: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    check_dim(m1.ambient_dim(), phi.len())?;
    let inter = subspace_intersection(m1, m2)?;
    let degenerate = |phi_z: f64| Error::DegenerateZ {
        phi_z,
        zeros_t1: 0,
        zeros_t2: 0,
    };
    if inter.dim() == 0 {
        return Err(degenerate(0.0));
    }
    // φ restricted to the span; its Riesz vector maximizes |φ| on the unit sphere.
    let coeffs = inter.basis() * phi;
    let reach = coeffs.norm();
    if reach < tol * phi.norm() {
        return Err(degenerate(reach));
    }
    Ok(inter.basis().transpose() * (coeffs / reach))
}

/// One extension step from a hyperplane of `space`. `P` must have norm at
/// most 1 on its subspace.
pub fn extend_hyperplane(space: &TwoEllipsoidSpace, p: &QuadOnSubspace, tol: f64) -> Result<(SymForm, HyperplaneStep)> {
    extend_hyperplane_with(space, p, tol, &ExtendOptions::default())
}

pub fn extend_hyperplane_with(
    space: &TwoEllipsoidSpace,
    p: &QuadOnSubspace,
    tol: f64,
    opts: &ExtendOptions,
) -> Result<(SymForm, HyperplaneStep)> {
    let n = space.dim();
    let y = p.subspace();
    check_dim(n, y.ambient_dim())?;
    if n < 2 || y.dim() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "hyperplane step needs a subspace of dimension n - 1, got {} in dimension {n}",
            y.dim()
        )));
    }
    let b = p.form();

    let g1 = gram_restrict(space.pi1().form(), y)?;
    let g2 = gram_restrict(space.pi2().form(), y)?;
    let cert = dominating_combination(&g1, &g2, b, tol)?;
    let (a1p, a2p) = renormalize(space, p, &cert, tol)?;

    let t1 = representing_operator(&InnerProduct::new(gram_restrict(a1p.form(), y)?)?, b)?;
    let t2 = representing_operator(&InnerProduct::new(gram_restrict(a2p.form(), y)?)?, b)?;
    let phi = y.euclidean_complement().basis_vector(0);

    let mut policies = vec![ZeroPolicy::NonNegative];
    let (zt1, zt2) = (t1.default_zero_tol(), t2.default_zero_tol());
    let probe1 = split_eigenspaces_with(&t1, zt1, ZeroPolicy::NonNegative);
    let probe2 = split_eigenspaces_with(&t2, zt2, ZeroPolicy::NonNegative);
    if opts.zero_retry && (probe1.zero_count > 0 || probe2.zero_count > 0) {
        policies.push(ZeroPolicy::Negative);
    }

    let mut last_err = None;
    for (attempt, policy) in policies.iter().enumerate() {
        let s1: EigenSplit = split_eigenspaces_with(&t1, zt1, *policy).in_ambient(y)?;
        let s2: EigenSplit = split_eigenspaces_with(&t2, zt2, *policy).in_ambient(y)?;
        let m1 = orthogonal_complement(&a1p, &s1.nonneg)?;
        let m2 = orthogonal_complement(&a2p, &s2.neg)?;
        let z = match find_z(&m1, &m2, &phi, Z_TOL) {
            Ok(z) => z,
            Err(Error::DegenerateZ { phi_z, .. }) => {
                last_err = Some(Error::DegenerateZ {
                    phi_z,
                    zeros_t1: s1.zero_count,
                    zeros_t2: s2.zero_count,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let intersection = subspace_intersection(&m1, &m2)?.dim();
        let phi_z = phi.dot(&z);
        let projector = DMatrix::identity(n, n) - &z * phi.transpose() / phi_z;
        let extended = embed_form(b, y, &projector)?;
        let dims = SplitDims {
            y1: s1.nonneg.dim(),
            y2: s1.neg.dim(),
            y3: s2.nonneg.dim(),
            y4: s2.neg.dim(),
            m1: m1.dim(),
            m2: m2.dim(),
            intersection,
        };
        let step = HyperplaneStep {
            ambient: space.clone(),
            subspace: y.clone(),
            form: b.clone(),
            phi: phi.clone(),
            z,
            phi_z,
            projector,
            renorm: cert,
            renorm_pi1: a1p.clone(),
            renorm_pi2: a2p.clone(),
            y1: s1.nonneg,
            y2: s1.neg,
            y3: s2.nonneg,
            y4: s2.neg,
            m1,
            m2,
            dims,
            zeros_t1: s1.zero_count,
            zeros_t2: s2.zero_count,
            retried: attempt > 0,
            extended: extended.clone(),
            to_ambient: DMatrix::identity(n, n),
        };
        return Ok((extended, step));
    }
    Err(last_err.unwrap_or_else(|| Error::Internal("no split policy attempted".into())))
}

/// Nested subspaces `Y = W_k ⊂ … ⊂ W_n = ℝⁿ`; each level adds one
/// Euclidean-orthonormal complement direction of `Y`.
pub fn build_flag(y: &Subspace) -> Vec<Subspace> {
    let k = y.dim();
    let n = y.ambient_dim();
    let complement = y.euclidean_complement();
    let mut flag = vec![y.clone()];
    for j in 1..=(n - k) {
        let rows = linalg::vstack(y.basis(), &complement.basis().rows(0, j).into_owned());
        flag.push(Subspace::new(rows).expect("complement directions are independent of Y"));
    }
    flag
}

/// Extends `P` from its subspace to the whole space without increasing its
/// norm, and reports both norms measured with the original inner products.
pub fn extend(space: &TwoEllipsoidSpace, p: &QuadOnSubspace, tol: f64) -> Result<ExtensionReport> {
    extend_with(space, p, tol, &ExtendOptions::default())
}

pub fn extend_with(
    space: &TwoEllipsoidSpace,
    p: &QuadOnSubspace,
    tol: f64,
    opts: &ExtendOptions,
) -> Result<ExtensionReport> {
    let n = space.dim();
    let y = p.subspace();
    check_dim(n, y.ambient_dim())?;
    let k = y.dim();
    let original = norm_on_subspace(p, space, tol)?;

    let (extended, steps) = if original.value == 0.0 {
        (SymForm::zeros(n), Vec::new())
    } else if k == n {
        (p.ambient_form(), Vec::new())
    } else {
        chain(space, p, &original, tol, opts)?
    };

    let extended_norm = polynomial_norm(&extended, space.pi1(), space.pi2(), tol)?;
    let restricted = gram_restrict(&extended, y)?;
    let scale = linalg::max_abs(p.form().matrix()).max(1.0);
    let agreement_residual = linalg::max_abs(&(restricted.matrix() - p.form().matrix())) / scale;
    let report = ExtensionReport {
        extended,
        original_norm: original,
        extended_norm,
        steps,
        agreement_residual,
    };
    report.check()?;
    Ok(report)
}

fn chain(
    space: &TwoEllipsoidSpace,
    p: &QuadOnSubspace,
    original: &NormResult,
    tol: f64,
    opts: &ExtendOptions,
) -> Result<(SymForm, Vec<HyperplaneStep>)> {
    let n = space.dim();
    let y = p.subspace();
    let k = y.dim();

    // Unit-scale inner products; the norm of P scales by the same factor.
    let s_a = space.pi1().max_eigenvalue().max(space.pi2().max_eigenvalue());
    let scale = original.upper * s_a * (1.0 + SCALE_MARGIN);

    // Rows of V: an orthonormal basis of Y followed by its Euclidean
    // complement, so the leading j+1 coordinates span level j of the flag.
    let q = y.orthonormalized();
    let v = linalg::vstack(q.basis(), y.euclidean_complement().basis());
    let aw1 = &v * space.pi1().matrix() * v.transpose() / s_a;
    let aw2 = &v * space.pi2().matrix() * v.transpose() / s_a;
    let amb = p.ambient_form();
    let mut form = SymForm::new(q.basis() * amb.matrix() * q.basis().transpose() / scale)?;

    let mut steps = Vec::with_capacity(n - k);
    for j in k..n {
        let block = |m: &DMatrix<f64>| -> Result<InnerProduct> {
            InnerProduct::new(SymForm::new(m.view((0, 0), (j + 1, j + 1)).into_owned())?)
        };
        let step_space = TwoEllipsoidSpace::new(block(&aw1)?, block(&aw2)?)?;
        let step_p = QuadOnSubspace::new(Subspace::leading(j, j + 1), form)?;
        let (next, mut step) = extend_hyperplane_with(&step_space, &step_p, tol, opts)?;
        step.to_ambient = v.rows(0, j + 1).into_owned();
        steps.push(step);
        form = next;
    }
    let extended = SymForm::new(v.transpose() * form.matrix() * &v * scale)?;
    Ok((extended, steps))
}
