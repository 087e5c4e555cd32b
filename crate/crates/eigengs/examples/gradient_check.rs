//! Compare the analytic backward pass against central finite differences on
//! randomized small instances and print the worst deviations.
//!
//! ```bash
//! cargo run --release --example gradient_check
//! ```

use eigengs::grad::{fd_check, FdInstanceSpec, FdMode};

fn main() {
    for (label, mode) in [("components", FdMode::Components), ("image", FdMode::Image)] {
        println!("mode: {label}");
        for seed in 0..4u64 {
            let spec = FdInstanceSpec {
                width: 12,
                height: 12,
                n_gaussians: 6,
                k: if matches!(mode, FdMode::Components) { 3 } else { 1 },
                channels: 1,
                mode,
                seed,
            };
            let report = fd_check(&spec, 1e-3, 1e-3, 1e-6);
            let worst = report
                .entries
                .iter()
                .max_by(|a, b| a.abs_dev.total_cmp(&b.abs_dev))
                .expect("instances have parameters");
            println!(
                "  seed {seed}: {} params, max abs dev {:.2e} ({} vs {} at {}), {}",
                report.entries.len(),
                report.max_abs_dev,
                format_args!("{:.6}", worst.analytic),
                format_args!("{:.6}", worst.numeric),
                worst.name,
                if report.passes() { "PASS" } else { "FAIL" },
            );
        }
    }
}
