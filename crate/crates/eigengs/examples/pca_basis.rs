//! Fit an eigenbasis to a synthetic corpus and reconstruct a held-out image
//! at several component counts.
//!
//! ```bash
//! cargo run --release --example pca_basis
//! ```

use eigengs::basis::{fit_basis, project, reconstruct};
use eigengs::image::ImageCorpus;
use eigengs::metrics::psnr;
use eigengs::synth::{corpus, SynthConfig};

fn main() -> eigengs::Result<()> {
    let images = corpus(&SynthConfig { count: 64, width: 48, height: 48, seed: 7, ..Default::default() });
    let (train, held) = images.split_at(60);
    let train = ImageCorpus::new(train.to_vec())?;

    for k in [2, 8, 24] {
        let basis = fit_basis(&train, k)?;
        println!(
            "k = {k:>2}: top eigenvalue {:.3}, smallest kept {:.5}",
            basis.eigenvalues()[0],
            basis.eigenvalues()[k - 1]
        );
        let mut total = 0.0;
        for img in held {
            let coeffs = project(&basis, img)?;
            let rec = reconstruct(&basis, &coeffs)?;
            total += psnr(&rec, img)?;
        }
        println!("        mean held-out reconstruction PSNR {:.2} dB", total / held.len() as f64);
    }
    Ok(())
}
