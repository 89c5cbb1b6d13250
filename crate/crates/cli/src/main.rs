use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wfrestore::bench::{decay_csv, decay_profile, run_experiment, top_mass_share, ExperimentConfig, Fixture};
use wfrestore::degrade::{degrade, BlurType};
use wfrestore::imaging::{load_image, psnr, save_image, ssim};
use wfrestore::solvers::{solve, SolverKind, SolverParams};
use wfrestore::{BlurOperator, Boundary, Image, Kernel};

/// Overrides the worker thread count.
const THREADS_ENV: &str = "WFRESTORE_THREADS";

#[derive(Parser)]
#[command(name = "wfrestore", version, about = "Wavelet-frame image deblurring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blur an image and add seeded Gaussian noise.
    Degrade(DegradeArgs),
    /// Deblur an observation with one of the solvers.
    Restore(RestoreArgs),
    /// Run a benchmark described by a key=value config file.
    Bench(BenchArgs),
    /// Write the sorted high-pass coefficient magnitudes of an image as CSV.
    Decay(DecayArgs),
    /// Write a blur kernel in the plain-text dump format.
    Kernel(KernelArgs),
}

#[derive(Args)]
struct ImageInput {
    /// Input image (PGM or PNG).
    #[arg(long, short, conflicts_with = "fixture", required_unless_present = "fixture")]
    input: Option<PathBuf>,
    /// Built-in fixture instead of a file: cameraman, checkerboard, ramp, stripes.
    #[arg(long)]
    fixture: Option<Fixture>,
    /// Side length of procedural fixtures.
    #[arg(long, default_value_t = 128)]
    size: usize,
}

impl ImageInput {
    fn load(&self) -> Result<Image> {
        match (&self.input, self.fixture) {
            (Some(p), _) => load_image(p).with_context(|| format!("reading {}", p.display())),
            (None, Some(f)) => Ok(f.render(self.size)?),
            (None, None) => bail!("either --input or --fixture is required"),
        }
    }
}

#[derive(Args)]
struct BlurArg {
    /// Blur type I..IV, or a kernel dump file.
    #[arg(long, short, default_value = "III")]
    blur: String,
}

impl BlurArg {
    fn kernel(&self) -> Result<Kernel> {
        match self.blur.parse::<BlurType>() {
            Ok(t) => Ok(t.kernel()),
            Err(_) => Kernel::load(&self.blur).with_context(|| format!("loading kernel `{}`", self.blur)),
        }
    }
}

#[derive(Args)]
struct DegradeArgs {
    #[command(flatten)]
    image: ImageInput,
    #[command(flatten)]
    blur: BlurArg,
    /// Noise standard deviation on the 0..255 scale.
    #[arg(long, short, default_value_t = 3.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output image (PGM or PNG).
    #[arg(long, short)]
    output: PathBuf,
    /// Also save the clean input here (useful with --fixture).
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Also write the kernel dump here.
    #[arg(long)]
    kernel_out: Option<PathBuf>,
}

#[derive(Args)]
struct RestoreArgs {
    /// Observed image.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    blur: BlurArg,
    /// split_bregman, mdal, nonlocal_mdal or truncated_isd.
    #[arg(long, default_value = "truncated_isd")]
    solver: SolverKind,
    #[arg(long, short, default_value_t = 0.1)]
    lambda: f64,
    /// Weight of the nonlocal term.
    #[arg(long, default_value_t = 0.003)]
    nu: f64,
    /// Noise level used for the nonlocal filtering and guide defaults.
    #[arg(long, short, default_value_t = 3.0)]
    sigma: f64,
    #[arg(long, default_value_t = 3)]
    stages: usize,
    #[arg(long, default_value_t = 3.0)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long, default_value_t = Boundary::Symmetric)]
    boundary: Boundary,
    #[arg(long, default_value_t = 500)]
    max_inner: usize,
    #[arg(long, default_value_t = 5e-4)]
    tol: f64,
    /// Nonlocal filtering parameter h.
    #[arg(long)]
    filtering: Option<f64>,
    /// Regularization of the Tikhonov guide.
    #[arg(long)]
    tikhonov_eta: Option<f64>,
    /// Clean image; enables PSNR/SSIM reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Detect supports on the clean image (needs --truth).
    #[arg(long, requires = "truth")]
    oracle: bool,
    #[arg(long, short)]
    output: PathBuf,
    /// Per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Config file.
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    image: ImageInput,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long, default_value_t = Boundary::Symmetric)]
    boundary: Boundary,
    /// CSV output; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    blur: BlurArg,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV}=`{raw}` is not a thread count"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_degrade(a: DegradeArgs) -> Result<()> {
    let clean = a.image.load()?;
    let kernel = a.blur.kernel()?;
    let (_, observed) = degrade(&clean, &kernel, a.sigma, a.seed)?;
    save_image(&observed, &a.output)?;
    if let Some(p) = &a.truth_out {
        save_image(&clean, p)?;
    }
    if let Some(p) = &a.kernel_out {
        kernel.save(p)?;
    }
    println!(
        "degraded {}x{}: psnr {:.4} ssim {:.6}",
        clean.width(),
        clean.height(),
        psnr(&clean, &observed)?,
        ssim(&clean, &observed)?
    );
    Ok(())
}

fn cmd_restore(a: RestoreArgs) -> Result<()> {
    let f = load_image(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let op = BlurOperator::new(&a.blur.kernel()?, f.width(), f.height())?;
    let truth = a
        .truth
        .as_ref()
        .map(|p| load_image(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let mut params = match a.solver {
        SolverKind::SplitBregman => SolverParams::split_bregman(a.lambda),
        SolverKind::Mdal => SolverParams::mdal(a.lambda),
        SolverKind::NonlocalMdal => SolverParams::nonlocal_mdal(a.lambda, a.nu, a.sigma),
        SolverKind::TruncatedIsd => SolverParams::truncated_isd(a.lambda, a.nu, a.sigma, a.stages),
    };
    params.rho = a.rho;
    params.levels = a.levels;
    params.boundary = a.boundary;
    params.max_inner = a.max_inner;
    params.tol = a.tol;
    if let Some(h) = a.filtering {
        params.nonlocal.filtering = h;
    }
    if let Some(eta) = a.tikhonov_eta {
        params.tikhonov_eta = eta;
    }
    params.validate()?;
    let oracle = if a.oracle { truth.as_ref() } else { None };
    let mut report = solve(a.solver, &f, &op, &params, oracle)?;
    save_image(&report.image, &a.output)?;
    if let Some(t) = &truth {
        report.evaluate(t)?;
    }
    for s in &report.stages {
        let metrics = match (s.psnr, s.ssim) {
            (Some(p), Some(q)) => format!(" psnr {p:.4} ssim {q:.6}"),
            _ => String::new(),
        };
        println!(
            "stage {}: {} iterations{} support {}{}",
            s.stage,
            s.iterations,
            if s.converged { "" } else { " (not converged)" },
            s.support_size,
            metrics
        );
    }
    if let Some(p) = &a.trace {
        let mut csv = String::from("stage,iteration,relative_change,residual\n");
        for r in &report.iterations {
            csv.push_str(&format!(
                "{},{},{:e},{:e}\n",
                r.stage, r.iteration, r.relative_change, r.residual
            ));
        }
        write_text(Some(p), &csv)?;
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut config = ExperimentConfig::from_file(&a.config)?;
    if let Some(dir) = a.output {
        config.output = Some(dir);
    }
    let result = run_experiment(&config)?;
    print!("{}", result.summary_table());
    if let Some(dir) = &config.output {
        eprintln!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn cmd_decay(a: DecayArgs) -> Result<()> {
    let image = a.image.load()?;
    let profile = decay_profile(&image, a.levels, a.boundary)?;
    write_text(a.output.as_deref(), &decay_csv(&profile))?;
    if a.output.is_some() {
        println!(
            "{} coefficients; top 1% carry {:.2}% of the l1 mass",
            profile.len(),
            100.0 * top_mass_share(&profile, 0.01)
        );
    }
    Ok(())
}

fn cmd_kernel(a: KernelArgs) -> Result<()> {
    write_text(a.output.as_deref(), &a.blur.kernel()?.to_text())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Degrade(a) => cmd_degrade(a),
        Command::Restore(a) => cmd_restore(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Decay(a) => cmd_decay(a),
        Command::Kernel(a) => cmd_kernel(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
