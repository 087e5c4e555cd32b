//! PSNR/SSIM behavior under noise and the YCbCr round trip.
//!
//! ```bash
//! cargo run --release --example quality_metrics
//! ```

use eigengs::color::{rgb_to_ycbcr, ycbcr_to_rgb};
use eigengs::metrics::quality;
use eigengs::synth::{corpus, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> eigengs::Result<()> {
    let base = corpus(&SynthConfig { count: 1, width: 64, height: 64, seed: 3, ..Default::default() })
        .remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>10} {:>10} {:>8}", "noise", "psnr_db", "ssim");
    for amp in [0.0f32, 0.01, 0.05, 0.2] {
        let mut noisy = base.clone();
        for v in noisy.data_mut() {
            *v = (*v + rng.gen_range(-amp..=amp)).clamp(0.0, 1.0);
        }
        let score = quality(&base, &noisy)?;
        println!("{amp:>10.2} {:>10.2} {:>8.4}", score.psnr_db, score.ssim);
    }

    // Color round trip: studio-range YCbCr keeps in-gamut RGB intact.
    let rgb = corpus(&SynthConfig {
        count: 1,
        width: 32,
        height: 32,
        channels: 3,
        seed: 9,
        ..Default::default()
    })
    .remove(0);
    let back = ycbcr_to_rgb(&rgb_to_ycbcr(&rgb)?)?;
    let score = quality(&rgb, &back)?;
    println!("ycbcr round trip: psnr {:.1} dB, ssim {:.6}", score.psnr_db, score.ssim);
    Ok(())
}
