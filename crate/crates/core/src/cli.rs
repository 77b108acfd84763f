//! The `quadext` command-line tool.
//!
//! Exit codes: 0 success, 1 invalid input or flags, 2 a failed check,
//! 3 a degenerate extension direction. Errors are also written to stderr as a
//! one-line JSON object `{"error": kind, "message": text}`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::extend::extend;
use crate::instance::{read_file, to_json, write_file, ExtensionFile, InstanceFile};
use crate::normcalc::norm_on_subspace;
use crate::verify::{random_instance, verify_extension, InstanceSpec, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "quadext", version, about = "Norms and norm-preserving extensions of 2-polynomials")]
pub struct Cli {
    /// Pencil feasibility tolerance.
    #[arg(long, global = true, default_value_t = crate::DEFAULT_TOL)]
    pub tol: f64,
    /// Number of random directions drawn by the verification sampler.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    /// Seed for generation and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the norm of the instance's 2-polynomial with its certificate.
    Norm { file: PathBuf },
    /// Extend the 2-polynomial to the whole space.
    Extend {
        file: PathBuf,
        /// Output path (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check an extension file against its instance.
    Verify { file: PathBuf, extension: PathBuf },
    /// Write a random instance whose 2-polynomial has norm 1.
    Gen {
        /// Ambient dimension.
        #[arg(long)]
        dim: usize,
        /// Dimension of the subspace carrying the 2-polynomial.
        #[arg(long)]
        subdim: usize,
        /// Condition number cap for the inner products.
        #[arg(long, default_value_t = InstanceSpec::DEFAULT_CONDITIONING)]
        cond: f64,
        /// Output path (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate, extend and verify a batch of random instances.
    Selftest {
        /// Number of instances; instance i uses seed --seed + i.
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            report_error(err, &e);
            e.exit_code()
        }
    }
}

fn report_error(err: &mut dyn Write, e: &Error) {
    let obj = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    let _ = writeln!(err, "{obj}");
}

fn io(e: std::io::Error) -> Error {
    Error::Internal(format!("write failed: {e}"))
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", parts.join(", "))
}

fn load_instance(path: &Path) -> Result<crate::instance::Instance> {
    read_file::<InstanceFile>(path)?.validate()
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn verify_options(cli: &Cli) -> VerifyOptions {
    VerifyOptions {
        tol: cli.tol,
        samples: cli.samples,
        seed: cli.seed,
        ..VerifyOptions::default()
    }
}

fn check_flags(cli: &Cli) -> Result<()> {
    if !(cli.tol > 0.0) || !cli.tol.is_finite() {
        return Err(Error::InvalidInput(format!("--tol must be positive, got {}", cli.tol)));
    }
    if cli.samples == 0 {
        return Err(Error::InvalidInput("--samples must be at least 1".into()));
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    check_flags(cli)?;
    match &cli.command {
        Command::Norm { file } => {
            let inst = load_instance(file)?;
            let r = norm_on_subspace(&inst.p, &inst.space, cli.tol)?;
            writeln!(out, "norm: {:?}", r.value).map_err(io)?;
            writeln!(out, "alpha: {:?}", r.certificate.alpha).map_err(io)?;
            writeln!(out, "beta: {:?}", r.certificate.beta).map_err(io)?;
            writeln!(out, "certificate c: {:?}", r.upper).map_err(io)?;
            writeln!(out, "witness: {}", fmt_vec(&r.lower_witness)).map_err(io)?;
            writeln!(out, "witness ratio: {:?}", r.witness_ratio).map_err(io)?;
            Ok(0)
        }
        Command::Extend { file, out: path } => {
            let inst = load_instance(file)?;
            let report = extend(&inst.space, &inst.p, cli.tol)?;
            let text = to_json(&ExtensionFile::from_report(&report))?;
            emit(out, path.as_deref(), &text)?;
            Ok(0)
        }
        Command::Verify { file, extension } => {
            let inst = load_instance(file)?;
            let ext: ExtensionFile = read_file(extension)?;
            let btilde = ext.form(inst.space.dim())?;
            let v = verify_extension(&inst.space, &inst.p, &btilde, &verify_options(cli))?;
            writeln!(out, "restriction residual: {:e} ({})", v.restriction_residual, ok(v.restriction_ok)).map_err(io)?;
            writeln!(out, "original norm: {:?}", v.original_norm).map_err(io)?;
            writeln!(out, "extended norm: {:?} ({})", v.extended_norm, ok(v.norm_ok)).map_err(io)?;
            writeln!(out, "sampled lower bound: {:?} ({})", v.sampled_lower_bound, ok(v.sampler_ok)).map_err(io)?;
            if v.passed() {
                writeln!(out, "PASS").map_err(io)?;
                Ok(0)
            } else {
                writeln!(out, "FAIL").map_err(io)?;
                report_error(err, &Error::VerificationFailed("extension check failed".into()));
                Ok(2)
            }
        }
        Command::Gen { dim, subdim, cond, out: path } => {
            let spec = InstanceSpec {
                n: *dim,
                k: *subdim,
                seed: cli.seed,
                conditioning: *cond,
            };
            if *dim == 0 {
                return Err(Error::InvalidInput("--dim must be at least 1".into()));
            }
            let (space, p) = random_instance(&spec)?;
            let file = InstanceFile::from_instance(&space, &p);
            match path {
                Some(p) => write_file(p, &file)?,
                None => emit(out, None, &to_json(&file)?)?,
            }
            Ok(0)
        }
        Command::Selftest { instances } => selftest(cli, *instances, out, err),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

/// The `(n, k)` shapes cycled through by `selftest`: `n = 2..=6`, every
/// proper subspace dimension.
pub fn selftest_shapes() -> Vec<(usize, usize)> {
    (2..=6).flat_map(|n| (1..n).map(move |k| (n, k))).collect()
}

fn selftest(cli: &Cli, instances: usize, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if instances == 0 {
        return Err(Error::InvalidInput("--instances must be at least 1".into()));
    }
    let shapes = selftest_shapes();
    let opts = verify_options(cli);
    let start = Instant::now();
    let mut passed = 0;
    let mut failed_seeds = Vec::new();
    let mut worst_residual = 0.0f64;
    let mut worst_growth = f64::NEG_INFINITY;
    let mut worst_sampler_gap = f64::NEG_INFINITY;
    for i in 0..instances {
        let (n, k) = shapes[i % shapes.len()];
        let seed = cli.seed.wrapping_add(i as u64);
        let outcome = random_instance(&InstanceSpec::new(n, k, seed)).and_then(|(space, p)| {
            let report = extend(&space, &p, cli.tol)?;
            verify_extension(&space, &p, &report.extended, &opts)
        });
        match outcome {
            Ok(v) => {
                worst_residual = worst_residual.max(v.restriction_residual);
                worst_growth = worst_growth.max(v.extended_norm - v.original_norm);
                worst_sampler_gap = worst_sampler_gap.max(v.sampled_lower_bound - v.extended_norm);
                let status = if v.passed() {
                    passed += 1;
                    "pass"
                } else {
                    failed_seeds.push(seed);
                    "FAIL"
                };
                writeln!(
                    out,
                    "instance {i} seed {seed} n={n} k={k}: {status} residual {:.2e} norm {:.12} -> {:.12}",
                    v.restriction_residual, v.original_norm, v.extended_norm
                )
                .map_err(io)?;
            }
            Err(e) => {
                failed_seeds.push(seed);
                writeln!(out, "instance {i} seed {seed} n={n} k={k}: FAIL {e}").map_err(io)?;
            }
        }
    }
    writeln!(
        out,
        "passed {passed}/{instances}; worst restriction residual {worst_residual:.3e}; \
         worst norm growth {worst_growth:.3e}; worst sampler excess {worst_sampler_gap:.3e}; {:.2} s",
        start.elapsed().as_secs_f64()
    )
    .map_err(io)?;
    if failed_seeds.is_empty() {
        Ok(0)
    } else {
        report_error(
            err,
            &Error::VerificationFailed(format!("failing seeds: {failed_seeds:?}")),
        );
        Ok(2)
    }
}
