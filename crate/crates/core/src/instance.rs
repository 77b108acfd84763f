//! JSON instance and extension files.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which
//! round-trips `f64` exactly.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::{Error, Result};
use crate::extend::{ExtensionReport, HyperplaneStep};
use crate::form::{matrix_from_rows, matrix_to_rows, InnerProduct, QuadOnSubspace, Subspace, SymForm, TwoEllipsoidSpace};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: u32,
    pub dim: usize,
    pub pi1: Vec<Vec<f64>>,
    pub pi2: Vec<Vec<f64>>,
    pub subspace_basis: Vec<Vec<f64>>,
    pub form: Vec<Vec<f64>>,
}

/// A validated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub space: TwoEllipsoidSpace,
    pub p: QuadOnSubspace,
}

fn shape_error(field: &str, rows: usize, cols: usize, data: &[Vec<f64>]) -> Option<Error> {
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        let found = data.iter().map(Vec::len).collect::<Vec<_>>();
        return Some(Error::InvalidInput(format!(
            "{field} must be a {rows}x{cols} array, found {} rows of lengths {found:?}",
            data.len()
        )));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Some(Error::InvalidInput(format!("{field} has non-finite entries")));
    }
    None
}

fn gate(field: &str, e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite { min_eigenvalue, max_eigenvalue } => Error::InvalidInput(format!(
            "{field} fails the positive-definiteness gate: eigenvalues span [{min_eigenvalue:e}, {max_eigenvalue:e}]"
        )),
        Error::RankDeficient { smallest, largest } => Error::InvalidInput(format!(
            "{field} is not full rank: singular values span [{smallest:e}, {largest:e}]"
        )),
        other => Error::InvalidInput(format!("{field}: {other}")),
    }
}

impl InstanceFile {
    pub fn from_instance(space: &TwoEllipsoidSpace, p: &QuadOnSubspace) -> Self {
        InstanceFile {
            format: FORMAT_VERSION,
            dim: space.dim(),
            pi1: matrix_to_rows(space.pi1().matrix()),
            pi2: matrix_to_rows(space.pi2().matrix()),
            subspace_basis: matrix_to_rows(p.subspace().basis()),
            form: matrix_to_rows(p.form().matrix()),
        }
    }

    /// Checks every invariant and builds the typed instance.
    pub fn validate(&self) -> Result<Instance> {
        if self.format != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported format {} (expected {FORMAT_VERSION})",
                self.format
            )));
        }
        let n = self.dim;
        if n == 0 {
            return Err(Error::InvalidInput("dim must be at least 1".into()));
        }
        for (field, data) in [("pi1", &self.pi1), ("pi2", &self.pi2)] {
            if let Some(e) = shape_error(field, n, n, data) {
                return Err(e);
            }
        }
        let k = self.subspace_basis.len();
        if k == 0 || k > n {
            return Err(Error::InvalidInput(format!(
                "subspace_basis must have between 1 and {n} rows, found {k}"
            )));
        }
        if let Some(e) = shape_error("subspace_basis", k, n, &self.subspace_basis) {
            return Err(e);
        }
        if let Some(e) = shape_error("form", k, k, &self.form) {
            return Err(e);
        }
        let inner = |field: &str, rows: &[Vec<f64>]| -> Result<InnerProduct> {
            let m = matrix_from_rows(rows, n).map_err(|e| gate(field, e))?;
            InnerProduct::new(SymForm::new(m).map_err(|e| gate(field, e))?).map_err(|e| gate(field, e))
        };
        let pi1 = inner("pi1", &self.pi1)?;
        let pi2 = inner("pi2", &self.pi2)?;
        let sub = Subspace::from_rows(&self.subspace_basis, n).map_err(|e| gate("subspace_basis", e))?;
        let form = SymForm::from_rows(&self.form).map_err(|e| gate("form", e))?;
        Ok(Instance {
            space: TwoEllipsoidSpace::new(pi1, pi2)?,
            p: QuadOnSubspace::new(sub, form)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Extension direction in the original coordinates.
    pub z: Vec<f64>,
    /// Normal of the hyperplane in the original coordinates.
    pub phi: Vec<f64>,
    pub phi_z: f64,
    /// `[dim Y₁, dim Y₂, dim Y₃, dim Y₄, dim M₁, dim M₂]`.
    pub dims: [usize; 6],
    pub retried: bool,
}

impl StepRecord {
    fn from_step(s: &HyperplaneStep) -> Self {
        let d = s.dims;
        StepRecord {
            dim: s.ambient.dim(),
            alpha: s.renorm.alpha,
            beta: s.renorm.beta,
            z: s.z_ambient().iter().copied().collect(),
            phi: s.phi_ambient().iter().copied().collect(),
            phi_z: s.phi_z,
            dims: [d.y1, d.y2, d.y3, d.y4, d.m1, d.m2],
            retried: s.retried,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionFile {
    pub format: u32,
    pub dim: usize,
    pub extended: Vec<Vec<f64>>,
    pub original_norm: f64,
    pub extended_norm: f64,
    pub agreement_residual: f64,
    pub steps: Vec<StepRecord>,
}

impl ExtensionFile {
    pub fn from_report(r: &ExtensionReport) -> Self {
        ExtensionFile {
            format: FORMAT_VERSION,
            dim: r.extended.dim(),
            extended: r.extended.to_rows(),
            original_norm: r.original_norm.value,
            extended_norm: r.extended_norm.value,
            agreement_residual: r.agreement_residual,
            steps: r.steps.iter().map(StepRecord::from_step).collect(),
        }
    }

    /// The extended form, checked against the expected dimension.
    pub fn form(&self, expected_dim: usize) -> Result<SymForm> {
        if self.format != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported format {} (expected {FORMAT_VERSION})",
                self.format
            )));
        }
        if self.dim != expected_dim {
            return Err(Error::DimensionMismatch {
                expected: expected_dim,
                found: self.dim,
            });
        }
        if let Some(e) = shape_error("extended", self.dim, self.dim, &self.extended) {
            return Err(e);
        }
        SymForm::from_rows(&self.extended).map_err(|e| gate("extended", e))
    }
}

struct SeventeenDigits(PrettyFormatter<'static>);

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed file: {e}")))
}

pub fn read_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}
