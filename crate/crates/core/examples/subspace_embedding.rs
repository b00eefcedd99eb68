//! Distortion of Lewis-weight sketches as the budget grows.
//!
//! Run with `cargo run --example subspace_embedding`.

use l1_active::lewis::{
    lewis_weights, recommended_budget, sampling_values, LewisConfig, Regime,
    DEFAULT_BUDGET_CONSTANT,
};
use l1_active::linalg::DesignMatrix;
use l1_active::rng::RngStream;
use l1_active::sketch::{draw_sketch, embedding_distortion};
use rand_distr::{Distribution, StudentT};

fn main() -> anyhow::Result<()> {
    let (n, d) = (2000, 5);
    // Heavy-tailed entries make a few rows matter much more than others.
    let t = StudentT::new(1.5)?;
    let mut r = RngStream::new(1).rng();
    let x = DesignMatrix::new(n, d, (0..n * d).map(|_| t.sample(&mut r)).collect())?;
    let w = lewis_weights(&x, &LewisConfig::default())?;

    let rec = recommended_budget(d, 0.5, 0.1, Regime::ConstantProb, DEFAULT_BUDGET_CONSTANT)?;
    println!("recommended budget at eps = 0.5: {rec}");
    println!("{:>6} {:>10} {:>10}", "N", "median", "worst");
    for budget in [10, 25, 50, 100, rec, 400] {
        let p = sampling_values(&w, budget)?;
        let mut dist: Vec<f64> = (0..50)
            .map(|k| {
                let s = draw_sketch(&p, budget, &RngStream::new(2).substream("sketch", k))?;
                embedding_distortion(&s, &x, 100, &RngStream::new(3).substream("probe", k))
            })
            .collect::<Result<_, _>>()?;
        dist.sort_by(f64::total_cmp);
        println!("{budget:>6} {:>10.3} {:>10.3}", dist[25], dist[49]);
    }
    Ok(())
}
