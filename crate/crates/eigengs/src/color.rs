//! BT.601 studio-range RGB ↔ YCbCr conversion.
//!
//! Luma occupies 16–235 and chroma 16–240 on the 8-bit scale; the unused
//! swing is deliberate headroom for out-of-gamut values produced by
//! eigenbasis reconstruction. The forward transform therefore never clamps.
//! Clamping happens exactly once, in [`ycbcr_to_rgb`] / [`to_display`], at
//! the end of the pipeline.

use crate::error::{Error, Result};
use crate::image::{ColorSpace, PlanarImage};

pub const KR: f64 = 0.299;
pub const KG: f64 = 0.587;
pub const KB: f64 = 0.114;

/// Luma swing 219/255 with a 16/255 footroom.
const Y_SCALE: f64 = 219.0 / 255.0;
const Y_OFFSET: f64 = 16.0 / 255.0;
/// Chroma swing 224/255 centered on 128/255.
const C_SCALE: f64 = 224.0 / 255.0;
const C_OFFSET: f64 = 128.0 / 255.0;
const CB_NORM: f64 = 0.5 / (1.0 - KB);
const CR_NORM: f64 = 0.5 / (1.0 - KR);

#[inline]
fn forward(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let luma = KR * r + KG * g + KB * b;
    let y = Y_OFFSET + Y_SCALE * luma;
    let cb = C_OFFSET + C_SCALE * CB_NORM * (b - luma);
    let cr = C_OFFSET + C_SCALE * CR_NORM * (r - luma);
    (y, cb, cr)
}

#[inline]
fn inverse(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let luma = (y - Y_OFFSET) / Y_SCALE;
    let b = luma + (cb - C_OFFSET) / (C_SCALE * CB_NORM);
    let r = luma + (cr - C_OFFSET) / (C_SCALE * CR_NORM);
    let g = (luma - KR * r - KB * b) / KG;
    (r, g, b)
}

/// Forward transform; output is not clamped.
pub fn rgb_to_ycbcr(img: &PlanarImage) -> Result<PlanarImage> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch { expected: 3, got: img.channels() });
    }
    if img.space() != ColorSpace::Rgb {
        return Err(Error::ShapeError(format!("expected RGB input, got {:?}", img.space())));
    }
    let (w, h, _) = img.shape();
    let n = w * h;
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut data = vec![0.0f32; n * 3];
    for i in 0..n {
        let (y, cb, cr) = forward(r[i] as f64, g[i] as f64, b[i] as f64);
        data[i] = y as f32;
        data[n + i] = cb as f32;
        data[2 * n + i] = cr as f32;
    }
    PlanarImage::new(w, h, 3, ColorSpace::YCbCr, data)
}

/// Exact inverse of [`rgb_to_ycbcr`]; the resulting RGB is clamped to `[0, 1]`.
pub fn ycbcr_to_rgb(img: &PlanarImage) -> Result<PlanarImage> {
    if img.channels() != 3 {
        return Err(Error::ChannelMismatch { expected: 3, got: img.channels() });
    }
    if img.space() != ColorSpace::YCbCr {
        return Err(Error::ShapeError(format!("expected YCbCr input, got {:?}", img.space())));
    }
    let (w, h, _) = img.shape();
    let n = w * h;
    let (y, cb, cr) = (img.plane(0), img.plane(1), img.plane(2));
    let mut data = vec![0.0f32; n * 3];
    for i in 0..n {
        let (r, g, b) = inverse(y[i] as f64, cb[i] as f64, cr[i] as f64);
        data[i] = r.clamp(0.0, 1.0) as f32;
        data[n + i] = g.clamp(0.0, 1.0) as f32;
        data[2 * n + i] = b.clamp(0.0, 1.0) as f32;
    }
    PlanarImage::new(w, h, 3, ColorSpace::Rgb, data)
}

/// Maps any working-space image to clamped display values: YCbCr goes through
/// the inverse matrix, RGB and Linear are clamped in place. Metrics and PNG
/// export both go through here so comparisons share one space.
pub fn to_display(img: &PlanarImage) -> Result<PlanarImage> {
    match img.space() {
        ColorSpace::YCbCr => ycbcr_to_rgb(img),
        ColorSpace::Rgb | ColorSpace::Linear => {
            let data = img.data().iter().map(|&v| v.clamp(0.0, 1.0)).collect();
            let (w, h, c) = img.shape();
            PlanarImage::new(w, h, c, img.space(), data)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn solid(r: f32, g: f32, b: f32) -> PlanarImage {
        PlanarImage::new(2, 2, 3, ColorSpace::Rgb, [[r; 4], [g; 4], [b; 4]].concat()).unwrap()
    }

    #[test]
    fn white_maps_to_studio_peak() {
        let out = rgb_to_ycbcr(&solid(1.0, 1.0, 1.0)).unwrap();
        assert!((out.get(0, 0, 0) - 235.0 / 255.0).abs() < 1e-6);
        assert!((out.get(0, 0, 1) - 128.0 / 255.0).abs() < 1e-6);
        assert!((out.get(0, 0, 2) - 128.0 / 255.0).abs() < 1e-6);
    }

    #[test]
    fn black_maps_to_studio_floor() {
        let out = rgb_to_ycbcr(&solid(0.0, 0.0, 0.0)).unwrap();
        assert!((out.get(0, 0, 0) - 16.0 / 255.0).abs() < 1e-6);
        assert!((out.get(0, 0, 1) - 128.0 / 255.0).abs() < 1e-6);
        assert!((out.get(0, 0, 2) - 128.0 / 255.0).abs() < 1e-6);
    }

    #[test]
    fn gray_has_neutral_chroma() {
        for g in [0.1f32, 0.4, 0.73, 0.99] {
            let out = rgb_to_ycbcr(&solid(g, g, g)).unwrap();
            assert!((out.get(0, 0, 1) - 128.0 / 255.0).abs() < 1e-6, "Cb at gray {g}");
            assert!((out.get(0, 0, 2) - 128.0 / 255.0).abs() < 1e-6, "Cr at gray {g}");
        }
    }

    #[test]
    fn inverse_recovers_white_from_peak() {
        let ycbcr = PlanarImage::new(
            1,
            1,
            3,
            ColorSpace::YCbCr,
            vec![235.0 / 255.0, 128.0 / 255.0, 128.0 / 255.0],
        )
        .unwrap();
        let rgb = ycbcr_to_rgb(&ycbcr).unwrap();
        for c in 0..3 {
            assert!((rgb.get(0, 0, c) - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn out_of_range_luma_clamps_at_export() {
        let hot = PlanarImage::new(
            1,
            1,
            3,
            ColorSpace::YCbCr,
            vec![250.0 / 255.0, 128.0 / 255.0, 128.0 / 255.0],
        )
        .unwrap();
        let rgb = ycbcr_to_rgb(&hot).unwrap();
        for c in 0..3 {
            assert!(rgb.get(0, 0, c) <= 1.0);
        }
    }

    #[test]
    fn channel_mismatch_is_reported() {
        let gray = PlanarImage::new(2, 2, 1, ColorSpace::Linear, vec![0.5; 4]).unwrap();
        assert!(matches!(rgb_to_ycbcr(&gray), Err(crate::error::Error::ChannelMismatch { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip_is_identity_in_gamut(samples in proptest::collection::vec(0.0f32..=1.0, 12)) {
            let img = PlanarImage::new(2, 2, 3, ColorSpace::Rgb, samples).unwrap();
            let back = ycbcr_to_rgb(&rgb_to_ycbcr(&img).unwrap()).unwrap();
            for (a, b) in img.data().iter().zip(back.data()) {
                prop_assert!((a - b).abs() < 1e-5);
            }
        }

        #[test]
        fn conversion_commutes_with_pixel_permutation(
            samples in proptest::collection::vec(0.0f32..=1.0, 12),
            swap in (0usize..4, 0usize..4),
        ) {
            let img = PlanarImage::new(2, 2, 3, ColorSpace::Rgb, samples).unwrap();
            // Permute pixels (same permutation in every plane), then convert.
            let permute = |img: &PlanarImage| {
                let mut out = img.clone();
                let (i, j) = swap;
                for c in 0..3 {
                    let a = out.data()[c * 4 + i];
                    let b = out.data()[c * 4 + j];
                    out.data_mut()[c * 4 + i] = b;
                    out.data_mut()[c * 4 + j] = a;
                }
                out
            };
            let a = rgb_to_ycbcr(&permute(&img)).unwrap();
            let b = permute(&rgb_to_ycbcr(&img).unwrap());
            prop_assert_eq!(a.data(), b.data());
        }
    }
}
