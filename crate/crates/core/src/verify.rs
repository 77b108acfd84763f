//! Independent oracles and seeded instance generators.
//!
//! The sampler evaluates quadratic forms with its own loops and never touches
//! the pencil machinery, so it can check the certificate-based norm from the
//! outside: every value it returns is a realized ratio, hence a lower bound.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Result};
use crate::form::{gram_restrict, InnerProduct, QuadOnSubspace, Subspace, SymForm, TwoEllipsoidSpace};
use crate::normcalc::{norm_on_subspace, polynomial_norm};

/// Parameters of a generated problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    /// Eigenvalue spread cap of the generated inner products.
    pub conditioning: f64,
}

impl InstanceSpec {
    pub const DEFAULT_CONDITIONING: f64 = 1e3;

    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        InstanceSpec {
            n,
            k,
            seed,
            conditioning: Self::DEFAULT_CONDITIONING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n {
            return Err(crate::Error::InvalidInput(format!(
                "subspace dimension must satisfy 1 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if !(self.conditioning >= 1.0) || !self.conditioning.is_finite() {
            return Err(crate::Error::InvalidInput(format!(
                "conditioning must be a finite number >= 1, got {}",
                self.conditioning
            )));
        }
        Ok(())
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    (0..n * n).map(|i| m[(i / n, i % n)]).collect()
}

fn quad_flat(m: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let mut s = 0.0;
        for j in 0..n {
            s += row[j] * x[j];
        }
        acc += x[i] * s;
    }
    acc
}

struct RatioOracle {
    b: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
}

impl RatioOracle {
    fn ratio(&self, x: &[f64]) -> f64 {
        let den = quad_flat(&self.a1, x).max(quad_flat(&self.a2, x));
        if den > 0.0 {
            quad_flat(&self.b, x).abs() / den
        } else {
            0.0
        }
    }
}

/// Monte Carlo lower bound on `sup |B(x)| / max(A₁(x), A₂(x))`.
///
/// Draws `samples` Gaussian directions (deterministic per `seed`), keeps the
/// best few, then climbs the homogeneous ratio from each with coordinate and
/// random perturbations sized relative to the current vector (20 rounds of 5
/// sweeps, step halved each round). The returned value is the ratio at the
/// returned witness, which is scaled to the unit sphere of the max-norm.
pub fn sample_norm_lower_bound(
    b: &SymForm,
    a1: &InnerProduct,
    a2: &InnerProduct,
    samples: usize,
    seed: u64,
) -> (f64, DVector<f64>) {
    let n = b.dim();
    let oracle = RatioOracle {
        b: rows_of(b.matrix()),
        a1: rows_of(a1.matrix()),
        a2: rows_of(a2.matrix()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    // Best starts, sorted by descending ratio.
    let mut starts: Vec<(f64, Vec<f64>)> = vec![(oracle.ratio(&e1), e1)];
    let mut x = vec![0.0; n];
    for _ in 0..samples.max(1) {
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = oracle.ratio(&x);
        if starts.len() < ASCENT_STARTS || r > starts[starts.len() - 1].0 {
            let pos = starts.partition_point(|(s, _)| *s >= r);
            starts.insert(pos, (r, x.iter().map(|v| v / norm).collect()));
            starts.truncate(ASCENT_STARTS);
        }
    }

    let (mut best, mut best_x) = starts[0].clone();
    for (r0, x0) in starts {
        let (r, xr) = ascend(&oracle, r0, x0, &mut rng);
        if r > best {
            best = r;
            best_x = xr;
        }
    }

    let den = quad_flat(&oracle.a1, &best_x).max(quad_flat(&oracle.a2, &best_x));
    let witness = DVector::from_iterator(n, best_x.iter().map(|v| v / den.sqrt()));
    (best, witness)
}

const ASCENT_STARTS: usize = 4;

fn ascend(oracle: &RatioOracle, mut best: f64, mut best_x: Vec<f64>, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>) {
    let n = best_x.len();
    let mut step = 0.25;
    let mut trial = best_x.clone();
    for _round in 0..20 {
        for _sweep in 0..5 {
            for i in 0..n {
                let scale = best_x.iter().map(|v| v * v).sum::<f64>().sqrt() / (n as f64).sqrt();
                for sign in [1.0, -1.0] {
                    trial.copy_from_slice(&best_x);
                    trial[i] += sign * step * best_x[i].abs().max(scale);
                    let r = oracle.ratio(&trial);
                    if r > best {
                        best = r;
                        best_x.copy_from_slice(&trial);
                    }
                }
            }
            // Random directions can follow the ridge A₁(x) = A₂(x), where
            // coordinate moves alone stall.
            for _ in 0..2 * n {
                let scale = best_x.iter().map(|v| v * v).sum::<f64>().sqrt() / (n as f64).sqrt();
                for (t, b) in trial.iter_mut().zip(&best_x) {
                    *t = b + step * scale * rng.sample::<f64, _>(StandardNormal);
                }
                let r = oracle.ratio(&trial);
                if r > best {
                    best = r;
                    best_x.copy_from_slice(&trial);
                }
            }
        }
        step *= 0.5;
    }
    (best, best_x)
}

/// Outcome of [`verify_extension`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Max over basis pairs of `|uᵀB̃v − P(u,v)|`, divided by `max(1, max|P|)`.
    pub restriction_residual: f64,
    pub original_norm: f64,
    pub extended_norm: f64,
    pub sampled_lower_bound: f64,
    pub restriction_ok: bool,
    pub norm_ok: bool,
    pub sampler_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.restriction_ok && self.norm_ok && self.sampler_ok
    }
}

/// Thresholds for [`verify_extension`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tol: f64,
    pub agreement_tol: f64,
    pub norm_rel_tol: f64,
    pub norm_abs_tol: f64,
    pub sampler_abs_tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: crate::DEFAULT_TOL,
            agreement_tol: 1e-9,
            norm_rel_tol: 1e-6,
            norm_abs_tol: 1e-9,
            sampler_abs_tol: 1e-7,
            samples: 100_000,
            seed: 0,
        }
    }
}

/// Residual between `B̃` restricted to the subspace and `P`.
pub fn restriction_residual(p: &QuadOnSubspace, btilde: &SymForm) -> Result<f64> {
    let restricted = gram_restrict(btilde, p.subspace())?;
    let scale = p.form().matrix().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diff = restricted.matrix() - p.form().matrix();
    Ok(diff.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale)
}

/// Checks that `B̃` extends `P` (restriction residual), does not increase the
/// norm, and that the sampler cannot beat the certified norm of `B̃`.
pub fn verify_extension(
    space: &TwoEllipsoidSpace,
    p: &QuadOnSubspace,
    btilde: &SymForm,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_dim(space.dim(), p.subspace().ambient_dim())?;
    check_dim(space.dim(), btilde.dim())?;
    let residual = restriction_residual(p, btilde)?;
    let original = norm_on_subspace(p, space, opts.tol)?.value;
    let extended = polynomial_norm(btilde, space.pi1(), space.pi2(), opts.tol)?.value;
    let (sampled, _) = sample_norm_lower_bound(btilde, space.pi1(), space.pi2(), opts.samples, opts.seed);
    Ok(VerificationReport {
        restriction_residual: residual,
        original_norm: original,
        extended_norm: extended,
        sampled_lower_bound: sampled,
        restriction_ok: residual <= opts.agreement_tol,
        norm_ok: extended <= original * (1.0 + opts.norm_rel_tol) + opts.norm_abs_tol,
        sampler_ok: sampled <= extended * (1.0 + opts.tol) + opts.sampler_abs_tol,
    })
}

/// Seeded random-matrix helpers.
pub mod gen {
    use super::*;

    pub fn gaussian_matrix(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
    }

    /// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
    pub fn orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
        let qr = gaussian_matrix(rng, n, n).qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        q
    }

    /// `Q·diag(d)·Qᵀ` with `d` log-uniform in `[1, conditioning]`.
    pub fn spd(rng: &mut impl Rng, n: usize, conditioning: f64) -> DMatrix<f64> {
        let q = orthogonal(rng, n);
        let log_c = conditioning.ln();
        let d = DVector::from_fn(n, |_, _| (rng.random::<f64>() * log_c).exp());
        let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
        (&m + m.transpose()) * 0.5
    }

    /// `(G + Gᵀ)/2` for Gaussian `G`.
    pub fn symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
        let g = gaussian_matrix(rng, n, n);
        (&g + g.transpose()) * 0.5
    }

    /// Positive semidefinite `GGᵀ` with `G` Gaussian `n×rank`.
    pub fn psd(rng: &mut impl Rng, n: usize, rank: usize) -> DMatrix<f64> {
        let g = gaussian_matrix(rng, n, rank);
        let m = &g * g.transpose();
        (&m + m.transpose()) * 0.5
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

/// A random space and a random 2-polynomial of norm 1 on a random subspace,
/// deterministic in `spec.seed`.
pub fn random_instance(spec: &InstanceSpec) -> Result<(TwoEllipsoidSpace, QuadOnSubspace)> {
    spec.validate()?;
    let mut rng = gen::rng(spec.seed);
    let n = spec.n;
    let pi1 = InnerProduct::new(SymForm::new(gen::spd(&mut rng, n, spec.conditioning))?)?;
    let pi2 = InnerProduct::new(SymForm::new(gen::spd(&mut rng, n, spec.conditioning))?)?;
    let space = TwoEllipsoidSpace::new(pi1, pi2)?;
    let sub = loop {
        if let Ok(s) = Subspace::new(gen::gaussian_matrix(&mut rng, spec.k, n)) {
            break s;
        }
    };
    let raw = QuadOnSubspace::new(sub, SymForm::new(gen::symmetric(&mut rng, spec.k))?)?;
    let c = norm_on_subspace(&raw, &space, crate::DEFAULT_TOL)?.value;
    let p = if c > 0.0 { raw.scaled(1.0 / c) } else { raw };
    Ok((space, p))
}

/// Planted instance for the two-form combination: `P = S + (1−α*)Δ`,
/// `Q = S − α*Δ` with `S ⪰ 0`, so `α*P + (1−α*)Q = S`.
pub fn lemma_a_instance(seed: u64) -> (SymForm, SymForm, f64) {
    let mut rng = gen::rng(seed);
    let rank = 1 + (rng.random::<u32>() % 2) as usize;
    let s = gen::psd(&mut rng, 2, rank);
    let delta = gen::symmetric(&mut rng, 2) * 3.0;
    let alpha: f64 = rng.random();
    planted(&s, &delta, alpha)
}

pub fn planted(s: &DMatrix<f64>, delta: &DMatrix<f64>, alpha: f64) -> (SymForm, SymForm, f64) {
    let p = SymForm::new(s + delta * (1.0 - alpha)).expect("square finite");
    let q = SymForm::new(s - delta * alpha).expect("square finite");
    (p, q, alpha)
}
