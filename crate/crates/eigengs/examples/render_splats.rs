//! Render a handful of hand-placed Gaussians and write the result as PNG.
//!
//! ```bash
//! cargo run --release --example render_splats
//! ```

use std::path::Path;

use eigengs::image::{save_png, ColorSpace, PlanarImage};
use eigengs::splat::{render_image, Gaussian2D, ImageGaussianSet};

fn main() -> eigengs::Result<()> {
    let out_dir = Path::new("target/example-output");
    std::fs::create_dir_all(out_dir)?;

    let (w, h) = (128usize, 128usize);
    // A wide anisotropic stroke, a round bump, and a small negative dent.
    let gaussians = vec![
        Gaussian2D { pos_raw: [0.0, -0.6], fac_raw: [-3.2, 0.02, -1.8] },
        Gaussian2D::isotropic((0.3, 0.65), 9.0),
        Gaussian2D::isotropic((0.72, 0.7), 4.0),
    ];
    for g in &gaussians {
        let (cx, cy) = g.center();
        println!(
            "gaussian at ({:.2}, {:.2}) normalized, radius {:.1} px",
            cx,
            cy,
            g.radius()
        );
    }
    let weights = vec![0.55, 0.35, -0.3];
    let mean = PlanarImage::new(w, h, 1, ColorSpace::Linear, vec![0.25; w * h])?;
    let set = ImageGaussianSet::new(gaussians, weights, mean)?;

    let rendered = render_image(&set);
    let path = out_dir.join("splats.png");
    save_png(&path, &rendered)?;
    println!("wrote {}", path.display());
    Ok(())
}
