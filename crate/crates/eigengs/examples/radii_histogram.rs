//! Compare the Gaussian size distribution with and without the frequency
//! split. The split trains a small partition against the leading components
//! first, which leaves a visible population of large Gaussians.
//!
//! ```bash
//! cargo run --release --example radii_histogram
//! ```

use eigengs::basis::fit_basis;
use eigengs::image::ImageCorpus;
use eigengs::pipeline::radii_histogram_csv;
use eigengs::splat::gaussian_radii;
use eigengs::synth::{corpus, SynthConfig};
use eigengs::train::{fit_eigenbasis, TrainConfig};

fn percentile(sorted: &[f32], p: f64) -> f32 {
    sorted[((sorted.len() - 1) as f64 * p) as usize]
}

fn main() -> eigengs::Result<()> {
    let images = corpus(&SynthConfig { count: 64, width: 48, height: 48, seed: 17, ..Default::default() });
    let basis = fit_basis(&ImageCorpus::new(images)?, 10)?;

    let mut cfg = TrainConfig::new(300);
    cfg.phase1_iters = 700;
    cfg.phase2_iters = 700;
    cfg.seed = 2;
    let (with_fl, _) = fit_eigenbasis(&basis, &cfg)?;

    let mut cfg_off = cfg.clone();
    cfg_off.freq_learning = false;
    let (without_fl, _) = fit_eigenbasis(&basis, &cfg_off)?;

    let radii = gaussian_radii(&with_fl);
    let mut low: Vec<f32> = radii[..with_fl.n_low()].to_vec();
    let mut high: Vec<f32> = radii[with_fl.n_low()..].to_vec();
    low.sort_by(f32::total_cmp);
    high.sort_by(f32::total_cmp);
    println!(
        "with split:    low partition median {:.2} px, high partition median {:.2} px",
        percentile(&low, 0.5),
        percentile(&high, 0.5)
    );
    let mut all: Vec<f32> = gaussian_radii(&without_fl);
    all.sort_by(f32::total_cmp);
    println!(
        "without split: p10 {:.2} px, median {:.2} px, p90 {:.2} px",
        percentile(&all, 0.1),
        percentile(&all, 0.5),
        percentile(&all, 0.9)
    );

    println!("\nhistogram CSV (with split):");
    print!("{}", radii_histogram_csv(&with_fl, 12, None));
    Ok(())
}
