//! PSNR and SSIM in final display space.
//!
//! Both metrics convert their inputs to clamped display RGB first (YCbCr
//! goes through the inverse matrix) so that pipelines running in different
//! working spaces are compared on one footing. SSIM follows the original
//! single-scale formulation: 11×11 Gaussian window with sigma 1.5,
//! K1 = 0.01, K2 = 0.03, dynamic range 1, symmetric boundary reflection,
//! evaluated on the luminance channel for color images.

use crate::color;
use crate::error::{Error, Result};
use crate::image::PlanarImage;

const K1: f64 = 0.01;
const K2: f64 = 0.03;
const C1: f64 = K1 * K1;
const C2: f64 = K2 * K2;
const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;

/// Paired quality numbers for one comparison. `psnr_db` is
/// `f64::INFINITY` when the images agree exactly.
#[derive(Debug, Clone, Copy)]
pub struct QualityScore {
    pub psnr_db: f64,
    pub ssim: f64,
}

fn check_pair(a: &PlanarImage, b: &PlanarImage) -> Result<()> {
    if a.shape() != b.shape() || a.space() != b.space() {
        return Err(Error::ShapeError(format!(
            "metric inputs differ: {:?}/{:?} vs {:?}/{:?}",
            a.shape(),
            a.space(),
            b.shape(),
            b.space()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio, `10 log10(1 / MSE)` with peak 1.
pub fn psnr(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    check_pair(a, b)?;
    let da = color::to_display(a)?;
    let db = color::to_display(b)?;
    let mse = da
        .data()
        .iter()
        .zip(db.data())
        .map(|(&x, &y)| (x as f64 - y as f64) * (x as f64 - y as f64))
        .sum::<f64>()
        / da.data().len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

/// Mean local structural similarity.
pub fn ssim(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    check_pair(a, b)?;
    let da = color::to_display(a)?;
    let db = color::to_display(b)?;
    let (w, h, c) = da.shape();
    let (pa, pb): (Vec<f64>, Vec<f64>) = if c == 3 {
        let lum = |img: &PlanarImage| {
            let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
            (0..w * h)
                .map(|i| color::KR * r[i] as f64 + color::KG * g[i] as f64 + color::KB * b[i] as f64)
                .collect()
        };
        (lum(&da), lum(&db))
    } else {
        (
            da.plane(0).iter().map(|&v| v as f64).collect(),
            db.plane(0).iter().map(|&v| v as f64).collect(),
        )
    };
    Ok(ssim_plane(&pa, &pb, w, h))
}

pub fn quality(a: &PlanarImage, b: &PlanarImage) -> Result<QualityScore> {
    Ok(QualityScore { psnr_db: psnr(a, b)?, ssim: ssim(a, b)? })
}

fn window_kernel() -> [f64; WINDOW] {
    let mut k = [0.0f64; WINDOW];
    let half = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
        sum += *v;
    }
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Half-sample symmetric reflection, folded until in range.
#[inline]
fn reflect(mut i: i64, n: i64) -> usize {
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Gaussian-weighted blur, separable, with symmetric boundary.
fn blur(src: &[f64], w: usize, h: usize, kernel: &[f64; WINDOW]) -> Vec<f64> {
    let half = WINDOW as i64 / 2;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let sx = reflect(x as i64 + t as i64 - half, w as i64);
                acc += kv * src[y * w + sx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let sy = reflect(y as i64 + t as i64 - half, h as i64);
                acc += kv * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// SSIM over raw planes (no color handling); mean of the local map.
pub fn ssim_plane(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    assert_eq!(a.len(), w * h);
    assert_eq!(b.len(), w * h);
    let kernel = window_kernel();
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mu_a = blur(a, w, h, &kernel);
    let mu_b = blur(b, w, h, &kernel);
    let m_aa = blur(&aa, w, h, &kernel);
    let m_bb = blur(&bb, w, h, &kernel);
    let m_ab = blur(&ab, w, h, &kernel);
    let mut sum = 0.0;
    for i in 0..w * h {
        let va = m_aa[i] - mu_a[i] * mu_a[i];
        let vb = m_bb[i] - mu_b[i] * mu_b[i];
        let cov = m_ab[i] - mu_a[i] * mu_b[i];
        let num = (2.0 * mu_a[i] * mu_b[i] + C1) * (2.0 * cov + C2);
        let den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + C1) * (va + vb + C2);
        sum += num / den;
    }
    sum / (w * h) as f64
}
