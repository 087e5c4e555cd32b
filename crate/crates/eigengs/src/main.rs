use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eigengs::error::Error;
use eigengs::pipeline::{
    cmd_eval, cmd_fit, cmd_radii, cmd_train_basis, EvalArgs, FitArgs, RadiiArgs, TrainBasisArgs,
};
use eigengs::train::LearnRates;
use eigengs::ColorSpace;

/// Eigenbasis-seeded 2D Gaussian image representations.
#[derive(Parser)]
#[command(name = "eigengs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a PCA basis to a PNG corpus and train the shared Gaussian model.
    TrainBasis(TrainBasisCli),
    /// Initialize and fine-tune images against a trained model.
    Fit(FitCli),
    /// Aggregate fit CSVs into per-iteration statistics.
    Eval(EvalCli),
    /// Emit the per-partition histogram of Gaussian radii.
    Radii(RadiiCli),
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Rgb,
    Ycbcr,
    Gray,
}

impl From<SpaceArg> for ColorSpace {
    fn from(value: SpaceArg) -> Self {
        match value {
            SpaceArg::Rgb => ColorSpace::Rgb,
            SpaceArg::Ycbcr => ColorSpace::YCbCr,
            SpaceArg::Gray => ColorSpace::Linear,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct RateFlags {
    /// Adam learning rate for Gaussian centers.
    #[arg(long, default_value_t = 2e-3)]
    lr_pos: f32,
    /// Adam learning rate for covariance factors.
    #[arg(long, default_value_t = 2e-3)]
    lr_fac: f32,
    /// Adam learning rate for weights.
    #[arg(long, default_value_t = 1e-2)]
    lr_weight: f32,
}

impl From<RateFlags> for LearnRates {
    fn from(f: RateFlags) -> Self {
        LearnRates { pos: f.lr_pos, fac: f.lr_fac, weight: f.lr_weight }
    }
}

#[derive(Args)]
struct TrainBasisCli {
    /// Directory of training PNGs.
    #[arg(long)]
    dir: PathBuf,
    /// Working resolution; corpus images are resampled to fit.
    #[arg(long)]
    width: u32,
    /// Working resolution; corpus images are resampled to fit.
    #[arg(long)]
    height: u32,
    /// Number of basis components to keep.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    components: u32,
    /// Total Gaussian count.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    gaussians: u32,
    /// Fraction of Gaussians in the low-frequency partition.
    #[arg(long, default_value_t = 0.10)]
    low_frac: f32,
    /// Low-frequency component count (default: components / 10, rounded up).
    #[arg(long)]
    k_low: Option<u32>,
    /// Low-frequency phase iterations.
    #[arg(long, default_value_t = 1000)]
    iters1: u32,
    /// High-frequency phase iterations.
    #[arg(long, default_value_t = 1000)]
    iters2: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Working color space.
    #[arg(long, value_enum, default_value_t = SpaceArg::Ycbcr)]
    space: SpaceArg,
    /// Train a single phase over all Gaussians and components.
    #[arg(long)]
    no_freq_learning: bool,
    #[command(flatten)]
    rates: RateFlags,
    /// Output model path (.egs1); the training CSV lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitCli {
    /// Trained .egs1 model.
    #[arg(long)]
    model: PathBuf,
    /// Input image; repeat for a batch.
    #[arg(long = "image", required = true)]
    images: Vec<PathBuf>,
    /// Fine-tuning iterations.
    #[arg(long, default_value_t = 1000)]
    iters: u32,
    /// Trace sampling stride.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    eval_every: u32,
    /// Iterations at which to save intermediate renders.
    #[arg(long, value_delimiter = ',', default_value = "0,10,100,1000")]
    save_iters: Vec<u32>,
    #[command(flatten)]
    rates: RateFlags,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalCli {
    /// Glob of fit CSVs, e.g. 'out/*.csv'.
    #[arg(long)]
    reports: String,
    /// PSNR threshold for the percentage column.
    #[arg(long, default_value_t = 35.0)]
    threshold_db: f64,
    /// Write an SVG chart of the mean PSNR curve.
    #[arg(long)]
    svg_out: Option<PathBuf>,
}

#[derive(Args)]
struct RadiiCli {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    bins: u32,
    /// Histogram upper edge in pixels (default: the largest radius).
    #[arg(long)]
    max: Option<f32>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> eigengs::Result<()> {
    match cli.command {
        Command::TrainBasis(a) => cmd_train_basis(&TrainBasisArgs {
            dir: a.dir,
            width: a.width as usize,
            height: a.height as usize,
            components: a.components as usize,
            gaussians: a.gaussians as usize,
            low_frac: a.low_frac,
            k_low: a.k_low.map(|v| v as usize),
            iters1: a.iters1 as usize,
            iters2: a.iters2 as usize,
            seed: a.seed,
            space: a.space.into(),
            freq_learning: !a.no_freq_learning,
            rates: a.rates.into(),
            out: a.out,
        }),
        Command::Fit(a) => cmd_fit(&FitArgs {
            model: a.model,
            images: a.images,
            iters: a.iters as usize,
            eval_every: a.eval_every as usize,
            save_iters: a.save_iters.iter().map(|&v| v as usize).collect(),
            rates: a.rates.into(),
            out_dir: a.out_dir,
        }),
        Command::Eval(a) => cmd_eval(&EvalArgs {
            reports: a.reports,
            threshold_db: a.threshold_db,
            svg_out: a.svg_out,
        })
        .map(|_| ()),
        Command::Radii(a) => cmd_radii(&RadiiArgs {
            model: a.model,
            bins: a.bins as usize,
            max: a.max,
            out: a.out,
        }),
    }
}

fn main() -> ExitCode {
    eigengs::init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
