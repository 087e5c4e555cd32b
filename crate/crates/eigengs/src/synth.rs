//! Deterministic synthetic corpora: smooth random blobs over gradient
//! backgrounds, with a sprinkle of fine detail. Used by the examples and the
//! test fixtures; real corpora come from PNG directories instead.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::image::{save_png, ColorSpace, PlanarImage};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub seed: u64,
    /// Uniform pixel noise amplitude.
    pub noise: f32,
    /// Largest number of small sharp blobs per image; 0 keeps images smooth.
    pub max_fine_blobs: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            count: 16,
            width: 32,
            height: 32,
            channels: 1,
            seed: 0,
            noise: 0.005,
            max_fine_blobs: 4,
        }
    }
}

struct Blob {
    cx: f64,
    cy: f64,
    inv_two_s2: f64,
    amp: [f64; 3],
}

/// Generates `count` images of random smooth content. Identical configs
/// produce identical corpora.
pub fn corpus(cfg: &SynthConfig) -> Vec<PlanarImage> {
    assert!(cfg.channels == 1 || cfg.channels == 3);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count).map(|_| one_image(cfg, &mut rng)).collect()
}

fn one_image(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> PlanarImage {
    let (w, h, c) = (cfg.width, cfg.height, cfg.channels);
    let short = w.min(h) as f64;
    let base = rng.gen_range(0.3..0.7);
    let grad_x = rng.gen_range(-0.35..0.35);
    let grad_y = rng.gen_range(-0.35..0.35);
    let tint: [f64; 3] = if c == 3 {
        [rng.gen_range(-0.08..0.08), rng.gen_range(-0.08..0.08), rng.gen_range(-0.08..0.08)]
    } else {
        [0.0; 3]
    };

    let mut blobs = Vec::new();
    let n_smooth = rng.gen_range(4..=8);
    for _ in 0..n_smooth {
        let s = rng.gen_range(0.08..0.30) * short;
        let amp = rng.gen_range(0.10..0.40) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let channel_amp = channel_amps(amp, c, rng);
        blobs.push(Blob {
            cx: rng.gen_range(0.0..w as f64),
            cy: rng.gen_range(0.0..h as f64),
            inv_two_s2: 1.0 / (2.0 * s * s),
            amp: channel_amp,
        });
    }
    let n_fine = if cfg.max_fine_blobs < 2 {
        cfg.max_fine_blobs
    } else {
        rng.gen_range(2..=cfg.max_fine_blobs)
    };
    for _ in 0..n_fine {
        let s = rng.gen_range(0.015..0.045) * short;
        let amp = rng.gen_range(0.15..0.40) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let channel_amp = channel_amps(amp, c, rng);
        blobs.push(Blob {
            cx: rng.gen_range(0.0..w as f64),
            cy: rng.gen_range(0.0..h as f64),
            inv_two_s2: 1.0 / (2.0 * s * s),
            amp: channel_amp,
        });
    }

    let mut data = vec![0.0f32; w * h * c];
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                let fx = (x as f64 + 0.5) / w as f64;
                let fy = (y as f64 + 0.5) / h as f64;
                let mut v = base + grad_x * (fx - 0.5) + grad_y * (fy - 0.5) + tint[ch];
                for blob in &blobs {
                    let dx = x as f64 + 0.5 - blob.cx;
                    let dy = y as f64 + 0.5 - blob.cy;
                    let r2 = (dx * dx + dy * dy) * blob.inv_two_s2;
                    if r2 < 16.0 {
                        v += blob.amp[ch] * (-r2).exp();
                    }
                }
                if cfg.noise > 0.0 {
                    v += rng.gen_range(-cfg.noise..cfg.noise) as f64;
                }
                data[(ch * h + y) * w + x] = v.clamp(0.0, 1.0) as f32;
            }
        }
    }
    let space = if c == 1 { ColorSpace::Linear } else { ColorSpace::Rgb };
    PlanarImage::new(w, h, c, space, data).expect("synthetic image is well formed")
}

fn channel_amps(amp: f64, c: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    if c == 3 {
        [
            amp * rng.gen_range(0.7..1.3),
            amp * rng.gen_range(0.7..1.3),
            amp * rng.gen_range(0.7..1.3),
        ]
    } else {
        [amp; 3]
    }
}

/// Writes images as zero-padded `img_###.png` files and returns the paths.
pub fn write_corpus(dir: &Path, images: &[PlanarImage]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(images.len());
    for (i, img) in images.iter().enumerate() {
        let path = dir.join(format!("img_{i:04}.png"));
        save_png(&path, img)?;
        paths.push(path);
    }
    Ok(paths)
}
