//! Fine-tune an instantly initialized image set and save renders at a few
//! checkpoints alongside the PSNR trace.
//!
//! ```bash
//! cargo run --release --example finetune
//! ```

use std::path::Path;

use eigengs::basis::fit_basis;
use eigengs::image::{save_png, ImageCorpus};
use eigengs::render_image;
use eigengs::synth::{corpus, SynthConfig};
use eigengs::train::{finetune_with_observer, fit_eigenbasis, LearnRates, TrainConfig};
use eigengs::transform::init_for_image;

fn main() -> eigengs::Result<()> {
    let out_dir = Path::new("target/example-output");
    std::fs::create_dir_all(out_dir)?;

    let images = corpus(&SynthConfig { count: 49, width: 48, height: 48, seed: 31, ..Default::default() });
    let (train, held) = images.split_at(48);
    let target = &held[0];
    let basis = fit_basis(&ImageCorpus::new(train.to_vec())?, 12)?;
    let mut cfg = TrainConfig::new(384);
    cfg.phase1_iters = 600;
    cfg.phase2_iters = 600;
    let (model, _) = fit_eigenbasis(&basis, &cfg)?;

    let initial = init_for_image(&model, &basis, target)?;
    let snapshots = [0usize, 10, 100, 400];
    let mut save = |iter: usize, set: &eigengs::ImageGaussianSet| {
        if snapshots.contains(&iter) {
            let path = out_dir.join(format!("finetune_iter{iter:04}.png"));
            save_png(&path, &render_image(set)).expect("png write");
        }
    };
    let (tuned, trace) =
        finetune_with_observer(&initial, target, 400, LearnRates::default(), 50, &mut save)?;

    save_png(&out_dir.join("finetune_target.png"), target)?;
    save_png(&out_dir.join("finetune_final.png"), &render_image(&tuned))?;
    for row in &trace.rows {
        println!(
            "iter {:>4}: psnr {:>6.2} dB, ssim {:.4}, loss {:.3e}",
            row.iteration, row.psnr_db, row.ssim, row.loss
        );
    }
    println!("renders in {}", out_dir.display());
    Ok(())
}
