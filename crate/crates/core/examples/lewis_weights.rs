//! Lewis weights of a design with one row in its own direction.
//!
//! Run with `cargo run --example lewis_weights`.

use l1_active::instances::{make_outlier_instance, OutlierConfig};
use l1_active::lewis::{compute_lewis, verify_fixed_point, LewisConfig};
use l1_active::linalg::leverage_scores;
use l1_active::rng::RngStream;

fn main() -> anyhow::Result<()> {
    let cfg = OutlierConfig {
        isolated_scale: Some(0.01),
        ..OutlierConfig::new(1000, 6, 0.0)
    };
    let inst = make_outlier_instance(&cfg, &RngStream::new(7))?;
    let fit = compute_lewis(&inst.x, &LewisConfig::default())?;
    let lev = leverage_scores(&inst.x)?;
    let k = inst.isolated_row.expect("isolated variant");

    println!("{} iterations, residual {:.2e}", fit.iterations, fit.residual);
    println!("sum of weights {:.10} (d = {})", fit.weights.total(), inst.x.cols());
    println!(
        "independent fixed-point check {:.2e}",
        verify_fixed_point(&inst.x, &fit.weights)?
    );
    // A tiny row in its own direction still carries a full unit of weight.
    println!("isolated row {k}: lewis {:.6}, leverage {:.6}", fit.weights[k], lev[k]);
    let typical = fit.weights.values.iter().filter(|&&w| w < 0.5).sum::<f64>() / 999.0;
    println!("mean weight of the other rows {typical:.6}");
    Ok(())
}
