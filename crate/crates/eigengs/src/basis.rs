//! Mean image and truncated eigenbasis of an image corpus.
//!
//! The decomposition runs on the `m × m` Gram matrix of mean-centered images
//! (the snapshot method), never materializing the `d × d` covariance, and is
//! exact for ranks up to `m - 1`. Accumulation is f64 throughout; component
//! storage is f32.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ImageCorpus, PlanarImage};
use crate::linalg;

/// Relative eigenvalue threshold below which a direction counts as numerical
/// noise rather than signal.
const RANK_REL_TOL: f64 = 1e-9;

/// Mean image plus `k` orthonormal eigenimages with their eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    mean: PlanarImage,
    /// `k × d` row-major, each row a unit-norm flattened eigenimage.
    components: Vec<f32>,
    /// Non-increasing, non-negative; same scaling as the `1/m` covariance.
    eigenvalues: Vec<f64>,
    k: usize,
}

/// Projection coefficients of one image onto an [`Eigenbasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCoeffs(pub Vec<f64>);

impl ProjectionCoeffs {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Eigenbasis {
    pub fn mean(&self) -> &PlanarImage {
        &self.mean
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Flattened sample count per component.
    pub fn dim(&self) -> usize {
        self.mean.sample_count()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.mean.shape()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn component(&self, j: usize) -> &[f32] {
        let d = self.dim();
        &self.components[j * d..(j + 1) * d]
    }

    pub fn components_flat(&self) -> &[f32] {
        &self.components
    }

    /// Component `j` wrapped as an image (same shape and space as the mean).
    pub fn component_image(&self, j: usize) -> PlanarImage {
        let (w, h, c) = self.shape();
        PlanarImage::new(w, h, c, self.mean.space(), self.component(j).to_vec())
            .expect("component length matches basis shape")
    }

    /// Reassembles a basis from parts, checking the stored invariants.
    /// Used by model deserialization.
    pub fn from_parts(
        mean: PlanarImage,
        components: Vec<f32>,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        let d = mean.sample_count();
        let k = eigenvalues.len();
        if k == 0 || components.len() != k * d {
            return Err(Error::ShapeError(format!(
                "components length {} != k({k}) * d({d})",
                components.len()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::RankError("eigenvalues not sorted non-increasing".into()));
        }
        if eigenvalues.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::RankError("negative or non-finite eigenvalue".into()));
        }
        Ok(Self { mean, components, eigenvalues, k })
    }
}

/// Computes the top-`k` eigenbasis of `corpus` via the snapshot method.
///
/// Components carry a deterministic sign: the entry of largest magnitude in
/// each eigenimage is positive. `k` beyond the numerical rank of the centered
/// data is rejected.
pub fn fit_basis(corpus: &ImageCorpus, k: usize) -> Result<Eigenbasis> {
    let m = corpus.len();
    let (w, h, c) = corpus.shape();
    let d = w * h * c;
    if k == 0 || k > (m - 1).min(d) {
        return Err(Error::RankError(format!(
            "k = {k} outside valid range 1..={} for m = {m}, d = {d}",
            (m - 1).min(d)
        )));
    }

    // Mean in f64, stored f32.
    let mut mean64 = vec![0.0f64; d];
    for img in corpus.images() {
        for (acc, &s) in mean64.iter_mut().zip(img.data()) {
            *acc += s as f64;
        }
    }
    let inv_m = 1.0 / m as f64;
    for v in mean64.iter_mut() {
        *v *= inv_m;
    }
    let mean = PlanarImage::new(
        w,
        h,
        c,
        corpus.space(),
        mean64.iter().map(|&v| v as f32).collect(),
    )?;

    // Centered snapshots, f64. Memory ceiling: m * d * 8 bytes.
    let centered: Vec<Vec<f64>> = corpus
        .images()
        .par_iter()
        .map(|img| img.data().iter().zip(&mean64).map(|(&s, &mu)| s as f64 - mu).collect())
        .collect();

    // Gram matrix (1/m) V^T V, one row per snapshot.
    let mut gram = vec![0.0f64; m * m];
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    if j < i {
                        0.0 // filled from symmetry below
                    } else {
                        centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum::<f64>()
                            * inv_m
                    }
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.iter().enumerate() {
        for j in i..m {
            gram[i * m + j] = row[j];
            gram[j * m + i] = row[j];
        }
    }

    let eig = linalg::sym_eigen(&gram, m);
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = eig.values.iter().filter(|&&v| v > lambda_max * RANK_REL_TOL && v > 0.0).count();
    if k > rank {
        return Err(Error::RankError(format!(
            "requested {k} components but corpus has numerical rank {rank}"
        )));
    }

    // Map Gram eigenvectors back to image space and normalize.
    let components: Vec<f32> = (0..k)
        .into_par_iter()
        .flat_map_iter(|j| {
            let u = &eig.vectors[j * m..(j + 1) * m];
            let mut comp = vec![0.0f64; d];
            for (i, snapshot) in centered.iter().enumerate() {
                let ui = u[i];
                for (acc, &s) in comp.iter_mut().zip(snapshot) {
                    *acc += ui * s;
                }
            }
            let norm = comp.iter().map(|v| v * v).sum::<f64>().sqrt();
            let inv = 1.0 / norm;
            // Deterministic sign: largest-magnitude entry positive.
            let mut best = 0usize;
            let mut best_abs = 0.0f64;
            for (idx, &v) in comp.iter().enumerate() {
                if v.abs() > best_abs {
                    best_abs = v.abs();
                    best = idx;
                }
            }
            let sign = if comp[best] < 0.0 { -inv } else { inv };
            comp.into_iter().map(move |v| (v * sign) as f32).collect::<Vec<f32>>()
        })
        .collect();

    let eigenvalues: Vec<f64> = eig.values[..k].iter().map(|&v| v.max(0.0)).collect();
    Eigenbasis::from_parts(mean, components, eigenvalues)
}

/// Coefficients of `img` against the basis: `w_j = <img - mean, comp_j>`.
pub fn project(basis: &Eigenbasis, img: &PlanarImage) -> Result<ProjectionCoeffs> {
    if img.shape() != basis.shape() || img.space() != basis.mean().space() {
        return Err(Error::ShapeError(format!(
            "image {:?}/{:?} does not match basis {:?}/{:?}",
            img.shape(),
            img.space(),
            basis.shape(),
            basis.mean().space()
        )));
    }
    let mean = basis.mean().data();
    let d = basis.dim();
    let coeffs = (0..basis.k())
        .map(|j| {
            let comp = basis.component(j);
            let mut acc = 0.0f64;
            for i in 0..d {
                acc += (img.data()[i] as f64 - mean[i] as f64) * comp[i] as f64;
            }
            acc
        })
        .collect();
    Ok(ProjectionCoeffs(coeffs))
}

/// Linear reconstruction `mean + Σ w_j comp_j`; output is not clamped.
pub fn reconstruct(basis: &Eigenbasis, coeffs: &ProjectionCoeffs) -> Result<PlanarImage> {
    if coeffs.len() != basis.k() {
        return Err(Error::ShapeError(format!(
            "got {} coefficients for a k = {} basis",
            coeffs.len(),
            basis.k()
        )));
    }
    let d = basis.dim();
    let mut acc: Vec<f64> = basis.mean().data().iter().map(|&v| v as f64).collect();
    for (j, &wj) in coeffs.0.iter().enumerate() {
        let comp = basis.component(j);
        for i in 0..d {
            acc[i] += wj * comp[i] as f64;
        }
    }
    let (w, h, c) = basis.shape();
    PlanarImage::new(w, h, c, basis.mean().space(), acc.into_iter().map(|v| v as f32).collect())
}
