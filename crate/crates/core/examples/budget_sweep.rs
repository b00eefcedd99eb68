//! Success rate against budget for several sampling schemes.
//!
//! Writes the report and CSV curve to the system temp directory.
//! Run with `cargo run --release --example budget_sweep`.

use l1_active::harness::{run_experiment, ExperimentSpec};

const SPEC: &str = r#"{
    "instance": {"kind": "outlier", "n": 2000, "d": 8, "magnitude": 50.0,
                 "outliers": 100, "isolated_scale": 0.5},
    "methods": ["lewis", "uniform", "leverage_l2_baseline", "known_y_augmented"],
    "budgets": [40, 80, 160, 320, 640],
    "eps": 0.1,
    "trials": 100,
    "seed": 2024
}"#;

fn main() -> anyhow::Result<()> {
    let spec = ExperimentSpec::from_json(SPEC)?;
    let report = run_experiment(&spec)?;
    println!("OPT = {:.3}", report.instance.opt.unwrap_or(f64::NAN));
    print!("{}", report.curve_csv());
    let dir = std::env::temp_dir();
    std::fs::write(dir.join("budget_sweep.json"), report.to_json()?)?;
    std::fs::write(dir.join("budget_sweep.csv"), report.curve_csv())?;
    println!("wrote {}", dir.join("budget_sweep.{json,csv}").display());
    Ok(())
}
