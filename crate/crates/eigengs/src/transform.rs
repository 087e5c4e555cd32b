//! The eigen-to-image bridge: collapsing a trained eigen-model plus
//! projection coefficients into an instant per-image Gaussian set.
//!
//! Rendering with collapsed weights is algebraically identical to the
//! coefficient-weighted sum of component renders plus the mean; the collapse
//! just reorders the double sum so that a new image costs one projection and
//! one weighted sum instead of a fresh optimization.

use crate::basis::{project, Eigenbasis, ProjectionCoeffs};
use crate::error::{Error, Result};
use crate::image::PlanarImage;
use crate::splat::{EigenGaussianModel, ImageGaussianSet};

/// Folds coefficients into per-Gaussian weights: `c_n = sum_j w_j psi_{n,j}`
/// per channel. Geometry is copied bit-for-bit; the basis mean rides along
/// for render time.
pub fn collapse(
    model: &EigenGaussianModel,
    coeffs: &ProjectionCoeffs,
    basis: &Eigenbasis,
) -> Result<ImageGaussianSet> {
    if coeffs.len() != model.k() {
        return Err(Error::ShapeError(format!(
            "got {} coefficients for a k = {} model",
            coeffs.len(),
            model.k()
        )));
    }
    let (bw, bh, bc) = basis.shape();
    if (bw, bh, bc, basis.k()) != model.basis_shape() {
        return Err(Error::ShapeError(format!(
            "basis shape ({bw}, {bh}, {bc}, {}) does not match model {:?}",
            basis.k(),
            model.basis_shape()
        )));
    }
    let n = model.n_gaussians();
    let c = model.channels();
    let k = model.k();
    let mut collapsed = vec![0.0f32; n * c];
    for g in 0..n {
        for ch in 0..c {
            // f64 accumulation: the sum is signed and cancellation-heavy.
            let mut acc = 0.0f64;
            for (j, &wj) in coeffs.0.iter().enumerate() {
                acc += wj * model.weights()[(g * k + j) * c + ch] as f64;
            }
            collapsed[g * c + ch] = acc as f32;
        }
    }
    ImageGaussianSet::new(model.gaussians().to_vec(), collapsed, basis.mean().clone())
}

/// Instant initialization for one image: project onto the basis, collapse.
pub fn init_for_image(
    model: &EigenGaussianModel,
    basis: &Eigenbasis,
    img: &PlanarImage,
) -> Result<ImageGaussianSet> {
    let coeffs = project(basis, img)?;
    collapse(model, &coeffs, basis)
}
