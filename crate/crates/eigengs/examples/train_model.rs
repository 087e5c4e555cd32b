//! Train a shared eigen-Gaussian model on a synthetic corpus with the
//! two-phase frequency split, then persist it as `.egs1`.
//!
//! ```bash
//! cargo run --release --example train_model
//! ```

use std::path::Path;

use eigengs::basis::fit_basis;
use eigengs::image::ImageCorpus;
use eigengs::model_io;
use eigengs::synth::{corpus, SynthConfig};
use eigengs::train::{fit_eigenbasis, TrainConfig};

fn main() -> eigengs::Result<()> {
    let out_dir = Path::new("target/example-output");
    std::fs::create_dir_all(out_dir)?;

    let images = corpus(&SynthConfig { count: 48, width: 32, height: 32, seed: 11, ..Default::default() });
    let basis = fit_basis(&ImageCorpus::new(images)?, 8)?;

    let mut cfg = TrainConfig::new(192);
    cfg.phase1_iters = 400;
    cfg.phase2_iters = 400;
    cfg.seed = 1;
    let (model, trace) = fit_eigenbasis(&basis, &cfg)?;
    println!(
        "partitions: {} low-frequency Gaussians on {} components, {} high on {}",
        model.n_low(),
        model.comp_split(),
        model.n_gaussians() - model.n_low(),
        model.k() - model.comp_split()
    );
    for row in &trace.rows {
        println!(
            "iter {:>4}: loss {:.3e}, fit-psnr {:.2} dB ({:.1}s)",
            row.iteration, row.loss, row.psnr_db, row.seconds
        );
    }

    let path = out_dir.join("toy.egs1");
    model_io::save(&path, &basis, &model)?;
    let reloaded = model_io::load(&path)?;
    assert_eq!(reloaded.model.weights(), model.weights());
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    Ok(())
}
