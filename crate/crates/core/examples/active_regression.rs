//! Active LAD regression with a file-backed label oracle.
//!
//! The labels sit in a text file; only the sampled lines are ever read.
//! Run with `cargo run --example active_regression`.

use l1_active::active::{active_solve, ActiveConfig};
use l1_active::instances::{make_outlier_instance, OutlierConfig};
use l1_active::io::write_labels;
use l1_active::l1solve::{objective, LadProblem};
use l1_active::oracle::{FileOracle, LabelOracle};
use l1_active::rng::RngStream;

fn main() -> anyhow::Result<()> {
    let cfg = OutlierConfig {
        outliers: 20,
        ..OutlierConfig::new(5000, 8, 1e4)
    };
    let inst = make_outlier_instance(&cfg, &RngStream::new(11))?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("y.txt");
    write_labels(&path, &inst.y)?;

    let full = LadProblem::new(inst.x.clone(), inst.y.clone())?;
    let acfg = ActiveConfig {
        eps: 0.25,
        ..ActiveConfig::default()
    };
    println!("n = {}, d = {}, OPT = {:.2}", inst.x.rows(), inst.x.cols(), inst.opt);
    for seed in 0..5 {
        let mut oracle = FileOracle::open(&path)?;
        let res = active_solve(&inst.x, &mut oracle, &acfg, &RngStream::new(seed))?;
        let obj = objective(&full, &res.beta)?;
        println!(
            "seed {seed}: N = {}, labels read {} ({} lines), ratio {:.4}",
            res.budget,
            oracle.query_count(),
            oracle.lines_read(),
            obj / inst.opt
        );
    }
    Ok(())
}
