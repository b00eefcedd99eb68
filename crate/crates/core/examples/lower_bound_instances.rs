//! The distributional families, their exact losses, and the reduction to a
//! matrix problem.
//!
//! Run with `cargo run --example lower_bound_instances`.

use l1_active::instances::{
    build_codebook, reduce_to_matrix, reduction_rows, DistributionalInstance, ReductionConstants,
};
use l1_active::l1solve::{solve_lad, LadProblem, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use l1_active::rng::RngStream;

fn main() -> anyhow::Result<()> {
    let cb = build_codebook(20, &RngStream::new(0))?;
    println!(
        "codebook d = 20: {} words (target {}), min distance {}",
        cb.words.len(),
        cb.target,
        cb.min_distance()
    );

    let star = cb.words[2].clone();
    let hyper = DistributionalInstance::biased_hypercube(star.clone(), 0.1)?;
    let mut one_off = star.clone();
    one_off[0] = -one_off[0];
    println!(
        "hypercube: loss at beta* {:.3}, one sign wrong {:.3}, zero {:.3}",
        hyper.optimal_loss(),
        hyper.expected_loss(&one_off)?,
        hyper.expected_loss(&[0.0; 20])?
    );

    let plus = DistributionalInstance::two_coin(4, 0.1, true)?;
    let minus = DistributionalInstance::two_coin(4, 0.1, false)?;
    for beta in [[1.0; 4], [0.0; 4], [-1.0; 4]] {
        let e1 = plus.expected_loss(&beta)? - plus.optimal_loss();
        let e2 = minus.expected_loss(&beta)? - minus.optimal_loss();
        println!("two coins at {:>4}: excess {e1:.3} / {e2:.3}", beta[0]);
    }

    let hidden = DistributionalInstance::hidden_coordinate(8, 3)?;
    println!("hidden coordinate d = 8: optimal loss {:.5}", hidden.optimal_loss());

    for constants in [ReductionConstants::Statement, ReductionConstants::Proof] {
        let n = reduction_rows(3, 0.2, 0.1, constants)?;
        println!("reduction rows for d = 3, eps = 0.2 ({constants:?}): {n}");
    }
    let small = DistributionalInstance::biased_hypercube(vec![1.0, -1.0, 1.0], 0.1)?;
    let m = reduce_to_matrix(&small, 0.2, 0.1, ReductionConstants::Proof, &RngStream::new(1))?;
    let sol = solve_lad(&LadProblem::new(m.x, m.y)?, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    println!(
        "matrix minimizer {:?}, distributional loss {:.3}",
        sol.beta,
        small.expected_loss(&sol.beta)?
    );
    Ok(())
}
