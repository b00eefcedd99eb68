//! Least absolute deviations against least squares on contaminated data.
//!
//! Run with `cargo run --example lad_solver`.

use l1_active::l1solve::{solve_lad, subgradient_certificate, LadProblem, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use l1_active::linalg::DesignMatrix;
use l1_active::rng::RngStream;
use rand::Rng;

fn main() -> anyhow::Result<()> {
    // y = 2 + 3 t with small noise, and a tenth of the points thrown far off.
    let n = 200;
    let mut r = RngStream::new(4).rng();
    let mut data = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let t: f64 = r.random_range(0.0..10.0);
        data.extend([1.0, t]);
        let mut v = 2.0 + 3.0 * t + r.random_range(-0.5..0.5);
        if r.random_bool(0.1) {
            v += 500.0;
        }
        y.push(v);
    }
    let x = DesignMatrix::new(n, 2, data)?;
    let prob = LadProblem::new(x.clone(), y.clone())?;
    let sol = solve_lad(&prob, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    println!("lad:   intercept {:.3}, slope {:.3}", sol.beta[0], sol.beta[1]);
    println!("       objective {:.3}, status {:?}, {} iterations", sol.objective, sol.status, sol.iterations);

    let cert = subgradient_certificate(&prob, &sol.beta, 1e-9)?;
    println!(
        "       {} rows interpolated, stationarity {:.2e}, certified {}",
        cert.zero_rows,
        cert.stationarity,
        cert.passes(&prob, DEFAULT_TOL)
    );

    // Least squares for comparison, from the 2x2 normal equations.
    let (mut s, mut st, mut stt, mut sy, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (row, v) in x.row_iter().zip(&y) {
        let t = row[1];
        s += 1.0;
        st += t;
        stt += t * t;
        sy += v;
        sty += t * v;
    }
    let det = s * stt - st * st;
    let (a, b) = ((stt * sy - st * sty) / det, (s * sty - st * sy) / det);
    println!("lsq:   intercept {a:.3}, slope {b:.3}");
    Ok(())
}
