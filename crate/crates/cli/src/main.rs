//! `tnn`: generate, sample, complete and analyze tensors under a linear
//! transform along the third mode.
//!
//! Set `TNN_THREADS` to cap the worker pool used for per-slice work and phase
//! experiments; the default is the available parallelism.

mod range;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tnn_core::analysis::{incoherence, metrics, phase_experiment, sampling_bound, GenModel, PhaseSetup, RankTarget};
use tnn_core::generators::{bernoulli_mask, gen_double_with_stats, gen_single_with_stats, GeneratorConfig};
use tnn_core::io as files;
use tnn_core::transform::BaseKind;
use tnn_core::tsvd::{t_svd, DEFAULT_RANK_EPS};
use tnn_core::{admm_complete, Error, LinearTransform, SolverConfig};

const THREADS_ENV: &str = "TNN_THREADS";

#[derive(Parser)]
#[command(name = "tnn", version, about = "Transformed tensor nuclear norm completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or combine transform matrices.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Draw a tensor with prescribed transform-domain tubal rank.
    Gen(GenArgs),
    /// Draw a Bernoulli sampling mask.
    Mask(MaskArgs),
    /// Complete a partially observed tensor by ADMM.
    Complete(CompleteArgs),
    /// Success counts over a grid of ranks and sampling rates.
    Phase(PhaseArgs),
    /// Tubal rank, incoherence and the sampling-rate bound of a tensor.
    Analyze(AnalyzeArgs),
    /// Reconstruction quality of a test tensor against a reference.
    Metrics(MetricsArgs),
}

#[derive(Subcommand)]
enum TransformCmd {
    Build(BuildArgs),
    /// Stack two transforms with the same n3 vertically.
    Concat {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Dft,
    Dct,
    Dwht,
    /// Random matrix with orthonormal columns.
    Rut,
    /// Random matrix with singular values in [smin, smax].
    Cond,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n3: usize,
    /// Output size; defaults to n3. Larger values give a slim transform.
    #[arg(long = "N3")]
    big_n3: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    smin: f64,
    #[arg(long, default_value_t = 2.0)]
    smax: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// `n1,n2,n3`.
    #[arg(long)]
    dims: String,
    #[arg(long)]
    transform: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long, requires = "rank2")]
    transform2: Option<PathBuf>,
    #[arg(long, requires = "transform2")]
    rank2: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Real Gaussian start; the output is stored as real when it stays real.
    #[arg(long)]
    real: bool,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long)]
    dims: String,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-2)]
    alpha0: f64,
    #[arg(long, default_value_t = 1e6)]
    alpha_max: f64,
    #[arg(long, default_value_t = 1.02)]
    rho: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 3000)]
    max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            alpha0: self.alpha0,
            alpha_max: self.alpha_max,
            rho_growth: self.rho,
            tol: self.tol,
            max_iters: self.max_iters,
            record_history: false,
        }
    }
}

#[derive(Args)]
struct CompleteArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    transform: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
    /// CSV with one row per run: iterations, residual, objective, converged.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long)]
    dims: String,
    /// Transform used to generate the ground truth.
    #[arg(long)]
    transform: PathBuf,
    /// Second generator transform; ranks then run over `ranks x ranks2`.
    #[arg(long, requires = "ranks2")]
    transform2: Option<PathBuf>,
    /// Transform handed to the solver; defaults to `--transform`.
    #[arg(long)]
    solve: Option<PathBuf>,
    /// MATLAB-style range, e.g. `2:2:50`.
    #[arg(long)]
    ranks: String,
    #[arg(long, requires = "transform2")]
    ranks2: Option<String>,
    /// MATLAB-style range, e.g. `0.05:0.05:0.95`.
    #[arg(long)]
    rates: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Writes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    transform: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
}

/// 17 significant digits: enough to round-trip any `f64`.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn parse_dims(s: &str) -> Result<[usize; 3]> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad dimension {p:?} in {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    match parts[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => bail!("--dims needs three comma-separated sizes, got {s:?}"),
    }
}

fn read_transform(path: &Path) -> Result<LinearTransform> {
    files::read_transform(path).with_context(|| format!("loading transform {}", path.display()))
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV}={raw:?} is not a thread count"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn build(args: &BuildArgs) -> Result<()> {
    let big = args.big_n3.unwrap_or(args.n3);
    let t = match args.kind {
        Kind::Dft => LinearTransform::slim_columns(BaseKind::Dft, big, args.n3)?,
        Kind::Dct => LinearTransform::slim_columns(BaseKind::Dct, big, args.n3)?,
        Kind::Dwht => LinearTransform::slim_columns(BaseKind::Dwht, big, args.n3)?,
        Kind::Rut => LinearTransform::random_unitary(args.n3, big, args.seed)?,
        Kind::Cond => LinearTransform::random_conditioned(args.n3, big, args.seed, args.smin, args.smax)?,
    };
    files::write_transform(&args.out, &t)?;
    print_transform(&t);
    Ok(())
}

fn print_transform(t: &LinearTransform) {
    println!("N3={}", t.big_n3());
    println!("n3={}", t.n3());
    println!("kappa={}", num(t.kappa()));
    println!("rho={}", num(t.rho()));
    println!("norm_1_to_2={}", num(t.one_to_two()));
}

fn generate(args: &GenArgs) -> Result<()> {
    let dims = parse_dims(&args.dims)?;
    let cfg = GeneratorConfig {
        max_iters: args.max_iters,
        rank_tol: args.rank_tol,
        seed: args.seed,
        real: args.real,
    };
    let t = read_transform(&args.transform)?;
    let (m, stats) = match (&args.transform2, args.rank2) {
        (Some(p2), Some(r2)) => gen_double_with_stats(&t, args.rank, &read_transform(p2)?, r2, dims, &cfg)?,
        _ => gen_single_with_stats(&t, dims, args.rank, &cfg)?,
    };
    files::write_tensor(&args.out, &m)?;
    println!("iterations={}", stats.iterations);
    println!("restarts={}", stats.restarts);
    for (i, r) in stats.ratios.iter().enumerate() {
        println!("tail_ratio{}={}", i + 1, num(*r));
    }
    Ok(())
}

fn mask(args: &MaskArgs) -> Result<()> {
    let m = bernoulli_mask(parse_dims(&args.dims)?, args.p, args.seed)?;
    files::write_mask(&args.out, &m)?;
    println!("observed={}", m.len());
    println!("rate={}", num(m.rate()));
    Ok(())
}

fn complete(args: &CompleteArgs) -> Result<()> {
    let m = files::read_tensor(&args.input)?;
    let mask = files::read_mask(&args.mask)?;
    let t = read_transform(&args.transform)?;
    let (x, rep) = admm_complete(&m, &mask, &t, &args.solver.config())?;
    files::write_tensor(&args.out, &x)?;
    let header = "iterations,final_residual,objective,converged";
    let row = format!(
        "{},{},{},{}",
        rep.iterations,
        num(rep.final_residual),
        num(rep.objective),
        rep.converged
    );
    if let Some(path) = &args.report {
        std::fs::write(path, format!("{header}\n{row}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("iterations={}", rep.iterations);
    println!("final_residual={}", num(rep.final_residual));
    println!("objective={}", num(rep.objective));
    println!("converged={}", rep.converged);
    if !rep.converged {
        eprintln!("warning: no convergence after {} iterations", rep.iterations);
    }
    Ok(())
}

fn phase(args: &PhaseArgs) -> Result<()> {
    let dims = parse_dims(&args.dims)?;
    let t1 = read_transform(&args.transform)?;
    let solve = match &args.solve {
        Some(p) => read_transform(p)?,
        None => t1.clone(),
    };
    let ranks = range::parse_usize(&args.ranks)?;
    let rates = range::parse_f64(&args.rates)?;
    let (gen, targets): (GenModel, Vec<RankTarget>) = match (&args.transform2, &args.ranks2) {
        (Some(p2), Some(r2)) => {
            let ranks2 = range::parse_usize(r2)?;
            let targets = ranks
                .iter()
                .flat_map(|&a| ranks2.iter().map(move |&b| RankTarget::Double(a, b)))
                .collect();
            (GenModel::Double(t1, read_transform(p2)?), targets)
        }
        _ => (GenModel::Single(t1), ranks.iter().map(|&r| RankTarget::Single(r)).collect()),
    };
    let setup = PhaseSetup { dims, gen, solve };
    let cells = phase_experiment(
        &setup,
        &targets,
        &rates,
        args.trials,
        args.seed,
        &args.solver.config(),
        &GeneratorConfig::default(),
    )?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let double = args.transform2.is_some();
    writeln!(out, "{}", if double { "r,r2,p,trials,successes" } else { "r,p,trials,successes" })?;
    for c in &cells {
        let ranks = match c.ranks {
            RankTarget::Single(r) => r.to_string(),
            RankTarget::Double(a, b) => format!("{a},{b}"),
        };
        writeln!(out, "{ranks},{},{},{}", num(c.p), c.trials, c.successes)?;
        if c.generator_failures > 0 {
            eprintln!("note: {ranks} p={}: {} generator failures counted as failures", c.p, c.generator_failures);
        }
    }
    out.flush()?;
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let x = files::read_tensor(&args.input)?;
    let t = read_transform(&args.transform)?;
    let tx = t.apply(&x)?;
    let r = t_svd(&tx)?.tubal_rank(DEFAULT_RANK_EPS);
    if r == 0 {
        bail!("{} is numerically zero in the transform domain", args.input.display());
    }
    let rep = incoherence(&tx, r, &t)?;
    let [n1, n2, _] = x.dims();
    println!("tubal_rank={r}");
    println!("mu={}", num(rep.mu));
    println!("nu={}", num(rep.nu));
    println!("lambda={}", num(rep.lambda));
    println!("kappa={}", num(t.kappa()));
    println!("rho={}", num(t.rho()));
    println!("sampling_bound={}", num(sampling_bound(&t, rep.lambda, r, n1, n2, args.c0)));
    Ok(())
}

fn print_metrics(args: &MetricsArgs) -> Result<()> {
    let a = files::read_tensor(&args.reference)?;
    let b = files::read_tensor(&args.test)?;
    let rep = metrics(&a, &b, args.peak)?;
    println!("psnr={}", num(rep.psnr));
    println!("ssim={}", num(rep.ssim));
    println!("mpsnr={}", num(rep.mpsnr));
    println!("mssim={}", num(rep.mssim));
    println!("rel_error={}", num(rep.rel_error));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Transform(TransformCmd::Build(a)) => build(&a),
        Command::Transform(TransformCmd::Concat { a, b, out }) => {
            let t = read_transform(&a)?.concat(&read_transform(&b)?)?;
            files::write_transform(&out, &t)?;
            print_transform(&t);
            Ok(())
        }
        Command::Gen(a) => generate(&a),
        Command::Mask(a) => mask(&a),
        Command::Complete(a) => complete(&a),
        Command::Phase(a) => phase(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Metrics(a) => print_metrics(&a),
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        // Library errors already embed their source; skip repeated causes.
        let mut msg = e.to_string();
        for cause in e.chain().skip(1).map(|c| c.to_string()) {
            if !msg.contains(&cause) {
                msg = format!("{msg}: {cause}");
            }
        }
        eprintln!("error: {msg}");
        let code = match e.downcast_ref::<Error>() {
            Some(Error::NoConvergence { .. }) => 3,
            _ => 1,
        };
        std::process::exit(code);
    }
}
