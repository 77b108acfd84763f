//! One-parameter symmetric pencils `α·M₁ + (1−α)·M₀`, `α ∈ [0, 1]`.
//!
//! `α ↦ λ_min(α·M₁ + (1−α)·M₀)` is concave (a minimum of linear functions of
//! `α`), so its maximum is found by golden-section search and every
//! superlevel set is a closed interval. Both the two-form convex combination
//! on `ℝ²` and the two-sided sandwich `−(βA₁+(1−β)A₂) ⪯ B ⪯ αA₁+(1−α)A₂`
//! reduce to this search.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::form::SymForm;
use crate::linalg;

/// Golden-section and bisection stop width in `α`.
///
/// The maximum of `λ_min` usually sits on a kink where two eigenvalues cross,
/// so the value error is linear in the width; `1e-13` keeps it far below the
/// default absolute tolerance for pencils with slopes up to ~1e3.
pub const ALPHA_WIDTH: f64 = 1e-13;

/// `{α ∈ [0,1] : λ_min(pencil(α)) ≥ −tol}`, with the location of the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub empty: bool,
    pub peak_alpha: f64,
    pub peak_value: f64,
}

impl FeasibleInterval {
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn midpoint(&self) -> Option<f64> {
        (!self.empty).then_some(0.5 * (self.lo + self.hi))
    }

    pub fn contains(&self, alpha: f64) -> bool {
        !self.empty && alpha >= self.lo && alpha <= self.hi
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

/// Scalars `α, β ∈ [0,1]` with
/// `−(βA₁+(1−β)A₂) ⪯ B ⪯ αA₁+(1−α)A₂` (to tolerance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCertificate {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_interval: (f64, f64),
    pub beta_interval: (f64, f64),
}

impl SandwichCertificate {
    /// Minimum eigenvalues of the two certified pencils
    /// `αA₁+(1−α)A₂ − B` and `βA₁+(1−β)A₂ + B`.
    pub fn pencil_min_eigs(&self, a1: &SymForm, a2: &SymForm, b: &SymForm) -> Result<(f64, f64)> {
        check_dim(a1.dim(), a2.dim())?;
        check_dim(a1.dim(), b.dim())?;
        let upper = a1.matrix() * self.alpha + a2.matrix() * (1.0 - self.alpha) - b.matrix();
        let lower = a1.matrix() * self.beta + a2.matrix() * (1.0 - self.beta) + b.matrix();
        Ok((linalg::min_eigenvalue(&upper), linalg::min_eigenvalue(&lower)))
    }
}

/// `α·M₁ + (1−α)·M₀` held as raw matrices for the inner search loops.
#[derive(Debug, Clone)]
pub(crate) struct Pencil {
    m0: DMatrix<f64>,
    m1: DMatrix<f64>,
}

impl Pencil {
    pub(crate) fn new(m0: DMatrix<f64>, m1: DMatrix<f64>) -> Self {
        Pencil { m0, m1 }
    }

    /// The sandwich pencil `α(A₁ − sB) + (1−α)(A₂ − sB)` with `s = ±1`.
    pub(crate) fn sandwich(a1: &DMatrix<f64>, a2: &DMatrix<f64>, b: &DMatrix<f64>, sign: f64) -> Self {
        Pencil {
            m0: a2 - b * sign,
            m1: a1 - b * sign,
        }
    }

    pub(crate) fn at(&self, alpha: f64) -> DMatrix<f64> {
        &self.m1 * alpha + &self.m0 * (1.0 - alpha)
    }

    pub(crate) fn min_eig(&self, alpha: f64) -> f64 {
        linalg::min_eigenvalue(&self.at(alpha))
    }

    /// `(α*, λ_min(α*))`; stops early once a value `≥ stop_at` is seen.
    pub(crate) fn peak(&self, stop_at: Option<f64>) -> (f64, f64) {
        golden_max(|a| self.min_eig(a), ALPHA_WIDTH, stop_at)
    }

    /// Whether some `α` reaches `λ_min ≥ −tol`.
    pub(crate) fn feasible(&self, tol: f64) -> bool {
        self.peak(Some(-tol)).1 >= -tol
    }

    pub(crate) fn interval(&self, tol: f64) -> FeasibleInterval {
        let (peak_alpha, peak_value) = self.peak(None);
        if peak_value < -tol {
            return FeasibleInterval {
                lo: f64::NAN,
                hi: f64::NAN,
                empty: true,
                peak_alpha,
                peak_value,
            };
        }
        let ok = |a: f64| self.min_eig(a) >= -tol;
        let lo = if ok(0.0) {
            0.0
        } else {
            bisect_crossing(&ok, 0.0, peak_alpha)
        };
        let hi = if ok(1.0) {
            1.0
        } else {
            bisect_crossing(&ok, 1.0, peak_alpha)
        };
        FeasibleInterval {
            lo,
            hi,
            empty: false,
            peak_alpha,
            peak_value,
        }
    }
}

/// Shrinks `[bad, good]` (in either orientation) to the boundary of the
/// feasible set and returns the feasible end.
fn bisect_crossing(ok: &impl Fn(f64) -> bool, mut bad: f64, mut good: f64) -> f64 {
    while (good - bad).abs() > ALPHA_WIDTH {
        let mid = 0.5 * (bad + good);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

fn golden_max(mut f: impl FnMut(f64) -> f64, width: f64, stop_at: Option<f64>) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let reached = |v: f64| stop_at.is_some_and(|s| v >= s);

    let mut best = (0.0, f(0.0));
    if reached(best.1) {
        return best;
    }
    let right = f(1.0);
    if right > best.1 {
        best = (1.0, right);
    }
    if reached(best.1) {
        return best;
    }

    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    while b - a > width && !reached(best.1) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        }
    }
    best
}

/// `λ_min(α·M₁ + (1−α)·M₀)`.
pub fn pencil_min_eig(m0: &SymForm, m1: &SymForm, alpha: f64) -> Result<f64> {
    check_dim(m0.dim(), m1.dim())?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(Pencil::new(m0.matrix().clone(), m1.matrix().clone()).min_eig(alpha))
}

/// Golden-section maximization of a concave `f` on `[0, 1]` down to bracket
/// width `tol`. Returns the best probe `(α*, f(α*))`; the endpoints are
/// always probed.
pub fn maximize_concave_on_unit_interval(f: impl FnMut(f64) -> f64, tol: f64) -> (f64, f64) {
    golden_max(f, tol.max(f64::EPSILON), None)
}

/// For 2×2 forms `P`, `Q` with `max(P(x), Q(x)) ≥ 0` everywhere, an
/// `α ∈ [0,1]` with `αP + (1−α)Q ⪰ −tol·I` (the maximizer of `λ_min`).
pub fn lemma_a_combination(p: &SymForm, q: &SymForm, tol: f64) -> Result<f64> {
    check_dim(2, p.dim())?;
    check_dim(2, q.dim())?;
    let pencil = Pencil::new(q.matrix().clone(), p.matrix().clone());
    let (alpha, value) = pencil.peak(None);
    if value < -tol {
        return Err(Error::Infeasible {
            best_alpha: alpha,
            best_min_eig: value,
        });
    }
    Ok(alpha)
}

/// Approximate check of `max(P(x), Q(x)) ≥ 0` on the unit circle: a uniform
/// grid over `θ ∈ [0, π)` plus a golden-section refinement around the grid
/// minimum.
pub fn check_pointwise_max(p: &SymForm, q: &SymForm, grid: usize) -> bool {
    if p.dim() != 2 || q.dim() != 2 {
        return false;
    }
    let grid = grid.max(64);
    let g = |theta: f64| {
        let x = DVector::from_vec(vec![theta.cos(), theta.sin()]);
        linalg::quad(p.matrix(), &x).max(linalg::quad(q.matrix(), &x))
    };
    let step = std::f64::consts::PI / grid as f64;
    let (imin, vmin) = (0..grid)
        .map(|i| (i, g(i as f64 * step)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    if vmin < -crate::DEFAULT_TOL {
        return false;
    }
    let left = (imin as f64 - 1.0) * step;
    let (t, _) = golden_max(|s| -g(left + 2.0 * step * s), 1e-12, None);
    g(left + 2.0 * step * t) >= -crate::DEFAULT_TOL
}

/// `{α ∈ [0,1] : αA₁ + (1−α)A₂ − B ⪰ −tol·I}`.
pub fn psd_interval(a1: &SymForm, a2: &SymForm, b: &SymForm, tol: f64) -> Result<FeasibleInterval> {
    check_dim(a1.dim(), a2.dim())?;
    check_dim(a1.dim(), b.dim())?;
    Ok(Pencil::sandwich(a1.matrix(), a2.matrix(), b.matrix(), 1.0).interval(tol))
}

/// Certificate `α, β` for `−(βA₁+(1−β)A₂) ⪯ B ⪯ αA₁+(1−α)A₂`, each chosen at
/// the midpoint of its feasible interval.
pub fn dominating_combination(
    a1: &SymForm,
    a2: &SymForm,
    b: &SymForm,
    tol: f64,
) -> Result<SandwichCertificate> {
    check_dim(a1.dim(), a2.dim())?;
    check_dim(a1.dim(), b.dim())?;
    let upper = Pencil::sandwich(a1.matrix(), a2.matrix(), b.matrix(), 1.0).interval(tol);
    if upper.empty {
        return Err(Error::HypothesisViolated {
            side: "upper",
            best_alpha: upper.peak_alpha,
            best_min_eig: upper.peak_value,
        });
    }
    let lower = Pencil::sandwich(a1.matrix(), a2.matrix(), b.matrix(), -1.0).interval(tol);
    if lower.empty {
        return Err(Error::HypothesisViolated {
            side: "lower",
            best_alpha: lower.peak_alpha,
            best_min_eig: lower.peak_value,
        });
    }
    Ok(SandwichCertificate {
        alpha: 0.5 * (upper.lo + upper.hi),
        beta: 0.5 * (lower.lo + lower.hi),
        alpha_interval: (upper.lo, upper.hi),
        beta_interval: (lower.lo, lower.hi),
    })
}
