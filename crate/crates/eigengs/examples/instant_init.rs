//! Instant per-image initialization: project a held-out image onto the
//! basis, collapse the coefficients into the shared Gaussians, and compare
//! the zero-iteration render against plain PCA reconstruction.
//!
//! ```bash
//! cargo run --release --example instant_init
//! ```

use eigengs::basis::{fit_basis, project, reconstruct};
use eigengs::image::ImageCorpus;
use eigengs::metrics::quality;
use eigengs::render_image;
use eigengs::synth::{corpus, SynthConfig};
use eigengs::train::{fit_eigenbasis, TrainConfig};
use eigengs::transform::init_for_image;

fn main() -> eigengs::Result<()> {
    let images = corpus(&SynthConfig { count: 56, width: 32, height: 32, seed: 23, ..Default::default() });
    let (train, held) = images.split_at(48);
    let basis = fit_basis(&ImageCorpus::new(train.to_vec())?, 10)?;

    let mut cfg = TrainConfig::new(256);
    cfg.phase1_iters = 500;
    cfg.phase2_iters = 500;
    let (model, _) = fit_eigenbasis(&basis, &cfg)?;

    println!("{:>6} {:>10} {:>10} {:>8}", "image", "pca_psnr", "init_psnr", "ssim");
    for (i, img) in held.iter().enumerate() {
        let coeffs = project(&basis, img)?;
        let pca = quality(&reconstruct(&basis, &coeffs)?, img)?;
        let set = init_for_image(&model, &basis, img)?;
        let init = quality(&render_image(&set), img)?;
        println!(
            "{i:>6} {:>10.2} {:>10.2} {:>8.4}",
            pca.psnr_db, init.psnr_db, init.ssim
        );
    }
    Ok(())
}
