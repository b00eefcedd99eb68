use l1_active::active::{active_solve, relative_error_gap, ActiveConfig, ActiveLearner, SamplingScheme};
use l1_active::instances::{make_outlier_instance, DistributionalInstance, OutlierConfig};
use l1_active::lewis::{
    check_row_addition_monotonicity, lewis_weights, sampling_values, stacked_copies, LewisConfig,
};
use l1_active::linalg::DesignMatrix;
use l1_active::oracle::{LabelOracle, VecOracle};
use l1_active::rng::RngStream;
use l1_active::sketch::draw_sketch;
use l1_active::weights::{WeightKind, WeightVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(seed: u64, n: usize, d: usize) -> DesignMatrix {
    let mut r = RngStream::new(seed).rng();
    let data = (0..n * d).map(|_| StandardNormal.sample(&mut r)).collect();
    DesignMatrix::new(n, d, data).unwrap()
}

fn cfg() -> LewisConfig {
    LewisConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lewis_sum_is_rank(seed in any::<u64>(), d in 1usize..8, extra in 0usize..40) {
        let x = gaussian(seed, d + extra, d);
        let w = lewis_weights(&x, &cfg()).unwrap();
        prop_assert!((w.total() - d as f64).abs() < 1e-6);
        prop_assert!(w.values.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-9));
    }

    #[test]
    fn lewis_permutation_equivariant(seed in any::<u64>(), d in 1usize..6, extra in 0usize..30) {
        let n = d + extra;
        let x = gaussian(seed, n, d);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut r = RngStream::new(seed ^ 1).rng();
        for i in (1..n).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let w = lewis_weights(&x, &cfg()).unwrap();
        let wp = lewis_weights(&x.select_rows(&perm), &cfg()).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((wp[k] - w[i]).abs() < 1e-8);
        }
    }

    /// Weights depend only on the column space: `X R` has the same weights.
    #[test]
    fn lewis_invariant_to_column_transform(seed in any::<u64>(), d in 1usize..6, extra in 0usize..30) {
        let x = gaussian(seed, d + extra, d);
        let mut r = RngStream::new(seed ^ 2).rng();
        // Unit lower-triangular with a random scale: always invertible.
        let mut rmat = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..i {
                rmat[i * d + j] = r.random_range(-2.0..2.0);
            }
            rmat[i * d + i] = r.random_range(0.5..3.0);
        }
        let mut data = Vec::with_capacity(x.rows() * d);
        for row in x.row_iter() {
            for j in 0..d {
                data.push((0..d).map(|k| row[k] * rmat[k * d + j]).sum());
            }
        }
        let xr = DesignMatrix::new(x.rows(), d, data).unwrap();
        let w = lewis_weights(&x, &cfg()).unwrap();
        let wr = lewis_weights(&xr, &cfg()).unwrap();
        for (a, b) in w.values.iter().zip(&wr.values) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn stacking_divides_weights(seed in any::<u64>(), d in 1usize..6, extra in 0usize..20, k in 2usize..4) {
        let x = gaussian(seed, d + extra, d);
        let w = lewis_weights(&x, &cfg()).unwrap();
        let ws = lewis_weights(&stacked_copies(&x, k), &cfg()).unwrap();
        for (i, v) in ws.values.iter().enumerate() {
            prop_assert!((v - w[i % x.rows()] / k as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn adding_rows_never_raises_weights(seed in any::<u64>(), d in 1usize..6, extra in 0usize..20, added in 1usize..10) {
        let x = gaussian(seed, d + extra, d);
        let more = gaussian(seed ^ 3, added, d);
        let check = check_row_addition_monotonicity(&x, &more, &cfg()).unwrap();
        prop_assert!(check.holds, "violation {}", check.max_violation);
    }

    #[test]
    fn sketch_draws_only_positive_rows(seed in any::<u64>(), n in 1usize..50, budget in 1usize..200) {
        let mut r = RngStream::new(seed).rng();
        let mut raw: Vec<f64> = (0..n).map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.01..5.0) }).collect();
        raw[0] = 1.0;
        let p = sampling_values(&WeightVector::new(WeightKind::Lewis, raw.clone()), budget).unwrap();
        let s = draw_sketch(&p, budget, &RngStream::new(seed ^ 4)).unwrap();
        prop_assert_eq!(s.budget(), budget);
        prop_assert!(s.distinct_indices().len() <= budget);
        for d in s.draws() {
            prop_assert!(raw[d.index] > 0.0);
            prop_assert_eq!(d.scale, 1.0 / p[d.index]);
        }
    }

    /// Excess losses on sign vectors are exactly `(2 eps / d) ||beta - beta*||_1`.
    #[test]
    fn hypercube_excess_identity(signs in prop::collection::vec(any::<bool>(), 1..12), flips in any::<u64>(), bias in 0.01f64..0.5) {
        let star: Vec<f64> = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
        let d = star.len();
        let beta: Vec<f64> = star.iter().enumerate().map(|(i, &s)| if flips >> (i % 64) & 1 == 1 { -s } else { s }).collect();
        let inst = DistributionalInstance::biased_hypercube(star.clone(), bias).unwrap();
        let dist: f64 = beta.iter().zip(&star).map(|(a, b)| (a - b).abs()).sum();
        let excess = inst.expected_loss(&beta).unwrap() - inst.optimal_loss();
        prop_assert!((excess - 2.0 * bias / d as f64 * dist).abs() < 1e-12);
        prop_assert!((inst.optimal_loss() - (1.0 - 2.0 * bias)).abs() < 1e-12);
    }

    /// No single estimate is good for both `+1_d` and `-1_d`.
    #[test]
    fn two_coin_tension(d in 1usize..10, bias in 0.01f64..0.5, beta in prop::collection::vec(-3.0f64..3.0, 10)) {
        let beta = &beta[..d];
        let plus = DistributionalInstance::two_coin(d, bias, true).unwrap();
        let minus = DistributionalInstance::two_coin(d, bias, false).unwrap();
        let e1 = plus.expected_loss(beta).unwrap() - plus.optimal_loss();
        let e2 = minus.expected_loss(beta).unwrap() - minus.optimal_loss();
        prop_assert!(e1.max(e2) >= 2.0 * bias - 1e-12);
    }

    /// An estimate can be good (loss below `1/(2d)`) for at most one hidden coordinate.
    #[test]
    fn hidden_coordinate_exclusive(d in 2usize..10, beta in prop::collection::vec(-1.5f64..1.5, 10), i in 0usize..10, k in 0usize..10) {
        let (i, k) = (i % d, k % d);
        prop_assume!(i != k);
        let bound = 0.5 / d as f64;
        let good = |b: &[f64], h: usize| {
            DistributionalInstance::hidden_coordinate(d, h).unwrap().expected_loss(b).unwrap() < bound
        };
        let random = &beta[..d];
        prop_assert!(!(good(random, i) && good(random, k)));
        // Adversarial probes: split mass between the two coordinates.
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut b = vec![0.0; d];
            b[i] = t;
            b[k] = 1.0 - t;
            prop_assert!(!(good(&b, i) && good(&b, k)));
        }
    }
}

#[test]
fn sketch_is_unbiased() {
    let n = 30;
    let mut r = RngStream::new(77).rng();
    let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..2.0)).collect();
    let v: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
    let budget = 10;
    let p = sampling_values(&WeightVector::new(WeightKind::Lewis, raw), budget).unwrap();
    let truth: f64 = v.iter().map(|a| a.abs()).sum();
    let trials = 4000;
    let mut counts = vec![0usize; n];
    let est: Vec<f64> = (0..trials)
        .map(|t| {
            let s = draw_sketch(&p, budget, &RngStream::new(5).substream("u", t)).unwrap();
            for d in s.draws() {
                counts[d.index] += 1;
            }
            s.sketched_norm1(&v).unwrap()
        })
        .collect();
    let mean = est.iter().sum::<f64>() / trials as f64;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    assert!((mean - truth).abs() < 5.0 * se, "mean {mean} truth {truth} se {se}");
    // Each row is drawn p_i times per sketch on average.
    for i in 0..n {
        let expect = p[i] * trials as f64;
        let sd = (trials as f64 * budget as f64 * (p[i] / budget as f64)).sqrt();
        assert!((counts[i] as f64 - expect).abs() < 5.0 * sd, "row {i}");
    }
}

#[test]
fn query_log_depends_only_on_design_and_seed() {
    let x = gaussian(12, 400, 5);
    let cfg = ActiveConfig {
        budget_override: Some(120),
        ..ActiveConfig::default()
    };
    let learner = ActiveLearner::new(&x, SamplingScheme::Lewis, cfg).unwrap();
    for seed in 0..10 {
        let rng = RngStream::new(seed);
        let mut zeros = VecOracle::new(vec![0.0; 400]);
        let mut noisy = VecOracle::new((0..400).map(|i| ((i * 7919) % 101) as f64 * 1e5).collect());
        let a = learner.run(&mut zeros, &rng).unwrap();
        let b = learner.run(&mut noisy, &rng).unwrap();
        assert_eq!(zeros.query_log(), noisy.query_log());
        assert_eq!(a.labels_queried, zeros.query_count());
        assert!(a.labels_queried <= 120 && b.labels_queried <= 120);
        let mut distinct = zeros.query_log().to_vec();
        distinct.dedup();
        assert_eq!(distinct.len(), zeros.query_count());
    }
}

#[test]
fn noiseless_labels_are_fit_exactly() {
    let x = gaussian(13, 200, 4);
    let y = x.mul_vec(&[0.5, -1.0, 2.0, 3.0]).unwrap();
    let scale: f64 = y.iter().map(|v| v.abs()).sum();
    let cfg = ActiveConfig {
        budget_override: Some(40),
        ..ActiveConfig::default()
    };
    for seed in 0..20 {
        let mut o = VecOracle::new(y.clone());
        let res = active_solve(&x, &mut o, &cfg, &RngStream::new(seed)).unwrap();
        let fit: f64 = x
            .mul_vec(&res.beta)
            .unwrap()
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(fit <= 1e-8 * scale, "seed {seed}: {fit}");
    }
}

/// When the outlier row is not sampled, its label cancels out of the gap.
#[test]
fn outlier_magnitude_cancels() {
    let base = OutlierConfig::new(2000, 10, 0.0);
    let inst = make_outlier_instance(&base, &RngStream::new(21)).unwrap();
    let j = inst.outlier_rows[0];
    let learner = ActiveLearner::new(
        &inst.x,
        SamplingScheme::Lewis,
        ActiveConfig {
            budget_override: Some(300),
            ..ActiveConfig::default()
        },
    )
    .unwrap();
    let mut checked = 0;
    for t in 0..10 {
        let s = learner.draw(&RngStream::new(22).substream("s", t)).unwrap();
        if s.distinct_indices().contains(&j) {
            continue;
        }
        let mut r = RngStream::new(23).substream("b", t).rng();
        let beta: Vec<f64> = inst
            .beta_star
            .iter()
            .map(|b| {
                let z: f64 = StandardNormal.sample(&mut r);
                b + z
            })
            .collect();
        let gaps: Vec<f64> = [1e3, 1e5, 1e7, 1e9]
            .iter()
            .map(|m| {
                let mut y = inst.y.clone();
                y[j] += m;
                relative_error_gap(&inst.x, &y, &s, &inst.opt_beta, &beta).unwrap()
            })
            .collect();
        for g in &gaps {
            assert!((g - gaps[0]).abs() <= 1e-9, "{gaps:?}");
        }
        checked += 1;
    }
    assert!(checked >= 5);
}
