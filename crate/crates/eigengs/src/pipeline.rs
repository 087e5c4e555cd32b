//! Batch pipeline commands behind the CLI: basis training, per-image
//! fitting, report aggregation, and the Gaussian-size histogram.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::basis::fit_basis;
use crate::error::{Error, Result};
use crate::image::{load_corpus, load_image, save_png, ColorSpace};
use crate::model_io::{self, SavedModel};
use crate::report::{self, AggRow};
use crate::splat::{render_image, EigenGaussianModel};
use crate::train::{finetune_with_observer, fit_eigenbasis, LearnRates, TrainConfig};
use crate::transform::init_for_image;

#[derive(Debug, Clone)]
pub struct TrainBasisArgs {
    pub dir: PathBuf,
    pub width: usize,
    pub height: usize,
    pub components: usize,
    pub gaussians: usize,
    pub low_frac: f32,
    pub k_low: Option<usize>,
    pub iters1: usize,
    pub iters2: usize,
    pub seed: u64,
    pub space: ColorSpace,
    pub freq_learning: bool,
    pub rates: LearnRates,
    pub out: PathBuf,
}

/// Where the training trace lands for a given model path.
pub fn training_csv_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("csv")
}

/// Loads a corpus, fits the basis, trains the shared Gaussian model, and
/// writes the `.egs1` bundle plus its training CSV.
pub fn cmd_train_basis(args: &TrainBasisArgs) -> Result<()> {
    let corpus = load_corpus(&args.dir, (args.width, args.height), args.space)?;
    eprintln!(
        "corpus: {} images at {}x{} ({:?})",
        corpus.len(),
        args.width,
        args.height,
        args.space
    );
    let basis = fit_basis(&corpus, args.components)?;
    eprintln!(
        "basis: k = {}, top eigenvalue {:.4e}",
        basis.k(),
        basis.eigenvalues().first().copied().unwrap_or(0.0)
    );
    let mut cfg = TrainConfig::new(args.gaussians);
    cfg.low_fraction = args.low_frac;
    cfg.k_low = args.k_low;
    cfg.lr_pos = args.rates.pos;
    cfg.lr_fac = args.rates.fac;
    cfg.lr_weight = args.rates.weight;
    cfg.phase1_iters = args.iters1;
    cfg.phase2_iters = args.iters2;
    cfg.seed = args.seed;
    cfg.freq_learning = args.freq_learning;
    let (model, trace) = fit_eigenbasis(&basis, &cfg)?;
    model_io::save(&args.out, &basis, &model)?;
    report::write_csv(&training_csv_path(&args.out), &trace)?;
    if let Some(last) = trace.last() {
        eprintln!(
            "trained {} Gaussians, final component loss {:.4e} ({:.1}s)",
            model.n_gaussians(),
            last.loss,
            last.seconds
        );
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub model: PathBuf,
    pub images: Vec<PathBuf>,
    pub iters: usize,
    pub eval_every: usize,
    pub save_iters: Vec<usize>,
    pub rates: LearnRates,
    pub out_dir: PathBuf,
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into())
}

fn fit_one(saved: &SavedModel, path: &Path, args: &FitArgs) -> Result<(f64, f64)> {
    let target = load_image(path, saved.model.space())?;
    let (w, h, c) = target.shape();
    if (w, h, c) != (saved.model.width(), saved.model.height(), saved.model.channels()) {
        return Err(Error::ShapeError(format!(
            "{}: image is {w}x{h}x{c}, model expects {}x{}x{}",
            path.display(),
            saved.model.width(),
            saved.model.height(),
            saved.model.channels()
        )));
    }
    let stem = file_stem(path);
    let initial = init_for_image(&saved.model, &saved.basis, &target)?;
    let mut save_err: Option<Error> = None;
    let (tuned, trace) = finetune_with_observer(
        &initial,
        &target,
        args.iters,
        args.rates,
        args.eval_every,
        &mut |iter, set| {
            if args.save_iters.contains(&iter) && save_err.is_none() {
                let png = args.out_dir.join(format!("{stem}_iter{iter:06}.png"));
                if let Err(e) = save_png(&png, &render_image(set)) {
                    save_err = Some(e);
                }
            }
        },
    )?;
    if let Some(e) = save_err {
        return Err(e);
    }
    save_png(&args.out_dir.join(format!("{stem}_final.png")), &render_image(&tuned))?;
    report::write_csv(&args.out_dir.join(format!("{stem}.csv")), &trace)?;
    let first = trace.rows.first().expect("trace has an initial row");
    let last = trace.last().expect("trace has rows");
    Ok((first.psnr_db, last.psnr_db))
}

/// Initializes and fine-tunes every image against the model, writing
/// requested iteration snapshots, the final render, and a per-image CSV.
/// Images run concurrently; a failing image is reported and the batch
/// continues.
pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    if args.images.is_empty() {
        return Err(Error::Usage("no input images given".into()));
    }
    let saved = model_io::load(&args.model)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let outcomes: Vec<(String, Result<(f64, f64)>)> = args
        .images
        .par_iter()
        .map(|path| (path.display().to_string(), fit_one(&saved, path, args)))
        .collect();
    let mut failures = 0usize;
    for (name, outcome) in &outcomes {
        match outcome {
            Ok((psnr0, psnr_final)) => {
                println!("{name}: init {psnr0:.2} dB -> final {psnr_final:.2} dB");
            }
            Err(e) => {
                failures += 1;
                eprintln!("error: {name}: {e}");
            }
        }
    }
    if failures > 0 {
        return Err(Error::Failed(format!("{failures} of {} images failed", outcomes.len())));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub reports: String,
    pub threshold_db: f64,
    pub svg_out: Option<PathBuf>,
}

/// Aggregates fit CSVs matched by the glob into a per-iteration summary.
pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<AggRow>> {
    let mut paths: Vec<PathBuf> = glob::glob(&args.reports)
        .map_err(|e| Error::Usage(format!("bad glob '{}': {e}", args.reports)))?
        .filter_map(|p| p.ok())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Usage(format!("no reports match '{}'", args.reports)));
    }
    let reports = paths.iter().map(|p| report::read_csv(p)).collect::<Result<Vec<_>>>()?;
    let rows = report::aggregate(&reports, args.threshold_db);
    print!("{}", report::format_table(&rows, args.threshold_db));
    if let Some(svg_path) = &args.svg_out {
        std::fs::write(svg_path, report::render_svg(&rows))?;
        eprintln!("wrote {}", svg_path.display());
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct RadiiArgs {
    pub model: PathBuf,
    pub bins: usize,
    /// Upper edge of the histogram; defaults to the largest radius.
    pub max: Option<f32>,
    pub out: Option<PathBuf>,
}

/// Per-partition histogram of Gaussian radii as CSV text.
pub fn radii_histogram_csv(model: &EigenGaussianModel, bins: usize, max: Option<f32>) -> String {
    let radii = crate::splat::gaussian_radii(model);
    let top = max.unwrap_or_else(|| radii.iter().fold(0.0f32, |m, &r| m.max(r))).max(f32::MIN_POSITIVE);
    let mut out = String::from("partition,bin_low,bin_high,count\n");
    let mut emit = |label: &str, values: &[f32]| {
        let mut counts = vec![0usize; bins];
        for &r in values {
            let idx = ((r / top) * bins as f32).floor() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        for (b, &count) in counts.iter().enumerate() {
            let lo = top as f64 * b as f64 / bins as f64;
            let hi = top as f64 * (b + 1) as f64 / bins as f64;
            out.push_str(&format!("{label},{lo},{hi},{count}\n"));
        }
    };
    if model.n_low() > 0 {
        emit("low", &radii[..model.n_low()]);
        emit("high", &radii[model.n_low()..]);
    } else {
        emit("all", &radii);
    }
    out
}

pub fn cmd_radii(args: &RadiiArgs) -> Result<()> {
    if args.bins == 0 {
        return Err(Error::Usage("need at least one bin".into()));
    }
    let saved = model_io::load(&args.model)?;
    let csv = radii_histogram_csv(&saved.model, args.bins, args.max);
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
