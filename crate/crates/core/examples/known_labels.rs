//! Sketch-and-solve when all labels are known, against label-free sampling.
//!
//! Sampling by the Lewis weights of `[X y]` sees the outliers; sampling by
//! those of `X` alone does not.
//! Run with `cargo run --example known_labels`.

use l1_active::active::{active_solve, sketch_and_solve_known_y, ActiveConfig};
use l1_active::instances::{make_outlier_instance, OutlierConfig};
use l1_active::l1solve::{objective, LadProblem};
use l1_active::oracle::VecOracle;
use l1_active::rng::RngStream;

fn main() -> anyhow::Result<()> {
    let cfg = OutlierConfig {
        outliers: 5,
        noise_scale: 0.01,
        ..OutlierConfig::new(3000, 5, 1e3)
    };
    let inst = make_outlier_instance(&cfg, &RngStream::new(5))?;
    let full = LadProblem::new(inst.x.clone(), inst.y.clone())?;
    let acfg = ActiveConfig {
        eps: 0.3,
        budget_override: Some(150),
        ..ActiveConfig::default()
    };
    let trials = 50;
    let (mut known_ok, mut active_ok) = (0, 0);
    for t in 0..trials {
        let rng = RngStream::new(6).substream("trial", t);
        let k = sketch_and_solve_known_y(&inst.x, &inst.y, &acfg, &rng)?;
        let a = active_solve(&inst.x, &mut VecOracle::new(inst.y.clone()), &acfg, &rng)?;
        known_ok += (objective(&full, &k.beta)? <= 1.3 * inst.opt) as usize;
        active_ok += (objective(&full, &a.beta)? <= 1.3 * inst.opt) as usize;
    }
    println!("OPT = {:.3}, N = 150, {trials} trials, target ratio 1.3", inst.opt);
    println!("known labels  [X y] weights: {known_ok}/{trials}");
    println!("active        X weights:     {active_ok}/{trials}");
    Ok(())
}
