//! Gaussian-splat image representations seeded from a PCA eigenbasis.
//!
//! The pipeline: fit an eigenbasis to an image corpus, train one shared set
//! of 2D Gaussians to reproduce every basis component at once, then turn
//! that shared model into a per-image Gaussian set in closed form (project
//! the image onto the basis, fold the coefficients into the weights) and
//! optionally fine-tune it against the image. See the `examples/` directory
//! for a runnable walkthrough of each capability and `README.md` for the
//! batch CLI.

pub mod basis;
pub mod color;
pub mod error;
pub mod grad;
pub mod image;
pub mod linalg;
pub mod metrics;
pub mod model_io;
pub mod pipeline;
pub mod report;
pub mod splat;
pub mod synth;
pub mod train;
pub mod transform;

pub use basis::{fit_basis, project, reconstruct, Eigenbasis, ProjectionCoeffs};
pub use error::{Error, Result};
pub use image::{load_corpus, load_image, save_png, ColorSpace, ImageCorpus, PlanarImage};
pub use splat::{
    gaussian_radii, render_components, render_image, EigenGaussianModel, Gaussian2D,
    ImageGaussianSet, Partition, SIGMA_CUT,
};

/// Installs a global worker pool sized by the `EIGENGS_THREADS` environment
/// variable. No-op when the variable is unset or a pool already exists.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var("EIGENGS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
