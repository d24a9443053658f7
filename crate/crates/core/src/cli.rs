//! Command-line front end shared by the `skewmat` binary and its tests.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::{compute_summary, error_curve, error_report, write_curve_csv, ApproxRunConfig};
use crate::error::{Error, Result};
use crate::group::{multi_pass_topk, recover_heavy, CandidateEntry, ConvolutionMode, GroupOptions};
use crate::io::{
    gen_heavy_product, gen_sparse_product, gen_uniform_nonneg, gen_zipf_product, lift_pair, read_fimi_file,
    stream_lift_summary, WeightKind, LIFT_DENSE_CEILING,
};
use crate::linalg::text::{read_matrix_file, write_dense};
use crate::linalg::{multiply_exact, DenseMatrix, Position};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Data = 2,
    /// A proven bound failed, which means a bug.
    BoundViolation = 3,
}

#[derive(Debug, Parser)]
#[command(name = "skewmat", version, about = "Approximate and sparse products of matrices given as outer-product streams")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a nonnegative product and check it against the exact product.
    Approx(ApproxArgs),
    /// Recover the heaviest entries of a real product by group testing.
    Recover(RecoverArgs),
    /// Lift similarities of a transaction database.
    Lift(LiftArgs),
    /// Write a synthetic factor pair.
    Gen(GenArgs),
    /// Error of the summary against its bounds for several capacities.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Matrix text file. One file holding A then B, or the flag twice.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Summary capacity; defaults to k + ceil(k / eps) when both are given.
    #[arg(long)]
    pub b: Option<usize>,
    /// Residual ranks to check; repeatable.
    #[arg(long)]
    pub k: Vec<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Norm order of the reported error.
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the summary as CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Sparsity budget for single-round recovery.
    #[arg(long)]
    pub b: Option<usize>,
    /// Entries kept per round in multi-round mode.
    #[arg(long)]
    pub k: Option<usize>,
    /// Rounds; selects multi-round mode.
    #[arg(long)]
    pub s: Option<usize>,
    /// Zipf skew assumed in multi-round mode.
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,
    /// Force the naive convolution everywhere.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    Approx,
    Recover,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Transaction file, one transaction of item ids per line.
    #[arg(long)]
    pub fimi: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub b: usize,
    #[arg(long, value_enum, default_value_t = Pipeline::Approx)]
    pub pipeline: Pipeline,
    /// Materialize the lift factor only below this many cells.
    #[arg(long, default_value_t = LIFT_DENSE_CEILING)]
    pub dense_ceiling: usize,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub parallel: bool,
    /// Report (approx) or entries (recover) CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Zipf-weighted nonnegative product, A = C and B = I.
    Zipf,
    /// Uniform nonnegative factors.
    Uniform,
    /// Real product with exactly `nnz` nonzeros.
    Sparse,
    /// `nnz` entries at +-100 over light noise.
    Heavy,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub nnz: usize,
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cell density for `uniform`.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
    /// Noise entries for `heavy`.
    #[arg(long, default_value_t = 0)]
    pub noise: usize,
    /// Integer weights for `sparse`; dyadic fractions otherwise.
    #[arg(long)]
    pub integer: bool,
    /// Matrix pair file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV of the planted entries.
    #[arg(long)]
    pub planted: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Capacities; repeatable. Powers of two up to n^2 when absent.
    #[arg(long)]
    pub b: Vec<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Opens `path` for writing, or stdout.
fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn load_pair(input: &InputArgs) -> Result<(DenseMatrix, DenseMatrix)> {
    let mut all = Vec::new();
    for p in &input.input {
        all.extend(read_matrix_file(p)?);
    }
    if all.len() != 2 {
        return Err(Error::invalid(
            "input",
            format!("expected two matrices A and B, found {}", all.len()),
        ));
    }
    let b = all.pop().unwrap();
    let a = all.pop().unwrap();
    Ok((a, b))
}

fn write_entries<W: Write>(w: W, entries: &[CandidateEntry]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "j", "weight", "prime", "residue"])?;
    for e in entries {
        out.write_record([
            e.row.to_string(),
            e.col.to_string(),
            e.weight.to_string(),
            e.prime.to_string(),
            e.residue.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn write_planted<W: Write>(w: W, planted: &[(Position, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "j", "weight"])?;
    for (p, x) in planted {
        out.write_record([p.row.to_string(), p.col.to_string(), x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn group_options(oracle: bool, parallel: bool) -> GroupOptions {
    GroupOptions {
        mode: if oracle { ConvolutionMode::Naive } else { ConvolutionMode::Auto },
        parallel,
        ..Default::default()
    }
}

fn report_violations(report: &crate::approx::ErrorReport, stderr: &mut dyn Write) -> Result<ExitStatus> {
    if report.all_satisfied() {
        return Ok(ExitStatus::Success);
    }
    for v in report.violations() {
        writeln!(stderr, "bound violated: {} measured {} > bound {}", v.name, v.measured, v.bound)?;
    }
    Ok(ExitStatus::BoundViolation)
}

fn approx(args: &ApproxArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<ExitStatus> {
    let b = match (args.b, args.k.first(), args.eps) {
        (Some(b), _, _) => b,
        (None, Some(&k), Some(eps)) if eps > 0.0 => k + (k as f64 / eps).ceil() as usize,
        _ => return Err(Error::invalid("b", "give --b, or --k with a positive --eps")),
    };
    let (a, bm) = load_pair(&args.input)?;
    let (a, bm) = (a.require_nonnegative()?, bm.require_nonnegative()?);
    let summary = compute_summary(&a, &bm, b)?;
    let c = multiply_exact(&a, &bm)?;
    let report = error_report(&c, &summary, &ApproxRunConfig::new(b, args.p, args.k.clone())?)?;
    if let Some(path) = &args.summary {
        summary.write_csv(BufWriter::new(File::create(path)?))?;
    }
    report.write_csv(sink(args.output.as_deref(), stdout)?)?;
    report_violations(&report, stderr)
}

fn recover(args: &RecoverArgs, stdout: &mut dyn Write) -> Result<ExitStatus> {
    let (a, b) = load_pair(&args.input)?;
    let opts = group_options(args.oracle, args.parallel);
    let found = match (args.s, args.k, args.b) {
        (Some(s), Some(k), _) => multi_pass_topk(&a, &b, k, s, args.z, &opts)?,
        (Some(_), None, _) => return Err(Error::invalid("k", "--s needs --k")),
        (None, _, Some(budget)) => recover_heavy(&a, &b, budget, &opts)?,
        (None, _, None) => return Err(Error::invalid("b", "give --b, or --k with --s")),
    };
    write_entries(sink(args.output.as_deref(), stdout)?, &found)?;
    Ok(ExitStatus::Success)
}

fn lift(args: &LiftArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<ExitStatus> {
    let db = read_fimi_file(&args.fimi)?;
    let dense = db.items().saturating_mul(db.m()) <= args.dense_ceiling;
    match args.pipeline {
        Pipeline::Approx if dense => {
            let (a, at) = lift_pair(&db);
            let summary = compute_summary(&a, &at, args.b)?;
            let c = multiply_exact(&a, &at)?;
            let report = error_report(&c, &summary, &ApproxRunConfig::new(args.b, 1, Vec::new())?)?;
            if let Some(path) = &args.summary {
                summary.write_csv(BufWriter::new(File::create(path)?))?;
            }
            report.write_csv(sink(args.output.as_deref(), stdout)?)?;
            report_violations(&report, stderr)
        }
        Pipeline::Approx => {
            // too large for the exact product; emit the summary only
            let summary = stream_lift_summary(&db, args.b)?;
            let path = args.summary.as_deref().or(args.output.as_deref());
            summary.write_csv(sink(path, stdout)?)?;
            Ok(ExitStatus::Success)
        }
        Pipeline::Recover => {
            let (a, at) = lift_pair(&db);
            let found = recover_heavy(&a, &at, args.b, &group_options(args.oracle, args.parallel))?;
            write_entries(sink(args.output.as_deref(), stdout)?, &found)?;
            Ok(ExitStatus::Success)
        }
    }
}

fn gen(args: &GenArgs, stdout: &mut dyn Write) -> Result<ExitStatus> {
    if args.n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let (a, b, planted) = match args.kind {
        Kind::Zipf => {
            let (a, b) = gen_zipf_product(args.n, args.z, args.nnz, args.seed)?;
            let planted: Vec<_> = a.entries().filter(|&(_, x)| x != 0.0).collect();
            (a, b, planted)
        }
        Kind::Uniform => {
            let (a, b) = gen_uniform_nonneg(args.n, args.density, args.seed)?;
            (a, b, Vec::new())
        }
        Kind::Sparse => {
            let kind = if args.integer { WeightKind::Integer } else { WeightKind::Dyadic };
            let inst = gen_sparse_product(args.n, args.nnz, kind, args.seed)?;
            (inst.a, inst.b, inst.planted)
        }
        Kind::Heavy => {
            let inst = gen_heavy_product(args.n, args.nnz, args.noise, args.seed)?;
            (inst.a, inst.b, inst.planted)
        }
    };
    let mut w = sink(args.output.as_deref(), stdout)?;
    write_dense(&mut w, &a)?;
    write_dense(&mut w, &b)?;
    w.flush()?;
    if let Some(path) = &args.planted {
        write_planted(BufWriter::new(File::create(path)?), &planted)?;
    }
    Ok(ExitStatus::Success)
}

fn report(args: &ReportArgs, stdout: &mut dyn Write) -> Result<ExitStatus> {
    let (a, b) = load_pair(&args.input)?;
    let (a, b) = (a.require_nonnegative()?, b.require_nonnegative()?);
    let sizes = if args.b.is_empty() {
        let cells = a.rows() * b.cols();
        std::iter::successors(Some(1usize), |&x| Some(x * 2))
            .take_while(|&x| x <= cells.max(1))
            .collect()
    } else {
        args.b.clone()
    };
    let c = multiply_exact(&a, &b)?;
    let curve = error_curve(&a, &b, &c, &sizes)?;
    write_curve_csv(sink(args.output.as_deref(), stdout)?, &curve)?;
    Ok(ExitStatus::Success)
}

/// Executes a parsed command.
pub fn run_cli(cfg: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus {
    let outcome = match &cfg.command {
        Command::Approx(a) => approx(a, stdout, stderr),
        Command::Recover(a) => recover(a, stdout),
        Command::Lift(a) => lift(a, stdout, stderr),
        Command::Gen(a) => gen(a, stdout),
        Command::Report(a) => report(a, stdout),
    };
    match outcome {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::InvalidParameter { .. } => ExitStatus::Usage,
                _ => ExitStatus::Data,
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match CliConfig::try_parse_from(args) {
        Ok(cfg) => run_cli(&cfg, stdout, stderr),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                ExitStatus::Usage
            } else {
                // --help and --version
                let _ = write!(stdout, "{text}");
                ExitStatus::Success
            }
        }
    }
}

/// Entry point of the binary.
pub fn main() -> ExitStatus {
    main_with(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock())
}
