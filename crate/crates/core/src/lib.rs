//! Norms and norm-preserving extensions of quadratic forms (2-polynomials)
//! on ℝⁿ normed by `‖x‖ = √max(Π₁(x,x), Π₂(x,x))`, the space whose unit ball
//! is the intersection of two ellipsoids.
//!
//! The pipeline is:
//!
//! * [`normcalc`] computes `‖P‖` exactly (to tolerance) through the two-sided
//!   sandwich certificate `−(βΠ₁+(1−β)Π₂) ≤ P ≤ αΠ₁+(1−α)Π₂`, decided by a
//!   concave one-parameter pencil search in [`pencil`];
//! * [`extend`] builds the extension hyperplane by hyperplane, using the
//!   eigenspace splits of the representing operators from [`spectral`];
//! * [`verify`] holds the independent oracles (sampling, random instances).

pub mod cli;
pub mod error;
pub mod extend;
pub mod form;
pub mod instance;
pub mod linalg;
pub mod normcalc;
pub mod pencil;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use extend::{extend, extend_hyperplane, ExtendOptions, ExtensionReport, HyperplaneStep};
pub use form::{InnerProduct, QuadOnSubspace, Subspace, SymForm, TwoEllipsoidSpace};
pub use normcalc::{norm_on_subspace, polynomial_norm, NormResult};
pub use pencil::{FeasibleInterval, SandwichCertificate};

/// Default absolute tolerance for pencil feasibility.
pub const DEFAULT_TOL: f64 = 1e-9;
