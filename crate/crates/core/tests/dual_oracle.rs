//! Verifies the variable-eliminated duals against the un-reduced
//! multiplier problems: a grid enumeration oracle on two-sample instances,
//! an algebraic identity between the paper-form objective at recovered
//! `(alpha, beta)` and the reduced objective at `lambda`, and the
//! true-minimizer comparison between the corrected and legacy negative-tau
//! formulations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinsvm_core::data::{class_weights, Dataset, WeightVector};
use pinsvm_core::dual::{build_incorrect_negative, recover_alpha_beta, reduce_unified, SignumTau};
use pinsvm_core::kernel::{gram, label_scaled_gram, GramMatrix, KernelSpec};
use pinsvm_core::loss::{primal_objective, Tau};
use pinsvm_core::model::bias;
use pinsvm_core::solver::{solve_smo, SolverConfig};

/// Paper-form dual objective evaluated directly from multiplier pairs:
/// `1/2 sum_ij (a_j - s b_j)(a_i - s b_i) y_i y_j K_ij - sum_i (a_i - s b_i)`.
fn unreduced_objective(alpha: &[f64], beta: &[f64], s: f64, k: &GramMatrix, y: &[f64]) -> f64 {
    let l = alpha.len();
    let mut quad = 0.0;
    for i in 0..l {
        for j in 0..l {
            quad += (alpha[j] - s * beta[j]) * (alpha[i] - s * beta[i]) * y[i] * y[j] * k.get(i, j);
        }
    }
    let lin: f64 = alpha.iter().zip(beta).map(|(&a, &b)| a - s * b).sum();
    0.5 * quad - lin
}

fn two_sample_instance(x1: f64, x2: f64, y: [f64; 2]) -> (Dataset, GramMatrix) {
    let data = Dataset::from_rows(vec![vec![x1], vec![x2]], y.to_vec()).unwrap();
    let k = gram(&KernelSpec::Linear, &data);
    (data, k)
}

/// Enumerates the un-reduced unified dual of a two-sample instance over a
/// fine grid of `alpha_1`, with `alpha_2` forced by the hyperplane, and
/// returns the best feasible objective found.
fn enumerate_unified(k: &GramMatrix, y: &[f64], weights: &WeightVector, tau: Tau) -> f64 {
    let t = tau.value();
    let s = SignumTau::of(tau).value();
    let abs_t = t.abs();
    let (c1, c2) = (weights.get(0), weights.get(1));
    let steps = 40_000;
    let mut best = f64::INFINITY;
    for step in 0..=steps {
        let a1 = c1 * step as f64 / steps as f64;
        let b1 = abs_t * (c1 - a1);
        let lam1 = a1 - s * b1;
        // y1 lam1 + y2 lam2 = 0.
        let lam2 = -y[0] * lam1 / y[1];
        let a2 = if t == 0.0 {
            lam2
        } else {
            (lam2 + t * c2) / (1.0 + t)
        };
        if !(0.0..=c2).contains(&a2) {
            continue;
        }
        let b2 = abs_t * (c2 - a2);
        let obj = unreduced_objective(&[a1, a2], &[b1, b2], s, k, y);
        if obj < best {
            best = obj;
        }
    }
    best
}

#[test]
fn reduced_solve_matches_grid_enumeration_of_the_unreduced_dual() {
    let cfg = SolverConfig {
        tol: 1e-10,
        ..Default::default()
    };
    for &(x1, x2, yy) in &[
        (1.0, -1.0, [1.0, -1.0]),
        (0.3, -2.0, [1.0, -1.0]),
        (2.0, 0.5, [-1.0, 1.0]),
    ] {
        let (data, k) = two_sample_instance(x1, x2, yy);
        let weights = class_weights(data.labels(), 1.0).unwrap();
        for &t in &[-0.9, -0.5, -0.1, 0.0, 0.5, 1.0] {
            let tau = Tau::new(t).unwrap();
            let q = label_scaled_gram(&k, data.labels()).unwrap();
            let qp = reduce_unified(&weights, tau, q, data.labels()).unwrap();
            let sol = solve_smo(&qp, &cfg).unwrap();
            let grid_best = enumerate_unified(&k, data.labels(), &weights, tau);
            // The solver must be at least as good as every enumerated
            // feasible point, and the grid must come close to it.
            assert!(
                sol.objective <= grid_best + 1e-9,
                "solver beaten by enumeration at tau={t}: {} vs {}",
                sol.objective,
                grid_best
            );
            assert!(
                grid_best - sol.objective <= 5e-4 * (1.0 + sol.objective.abs()),
                "enumeration cannot approach solver optimum at tau={t}"
            );
        }
    }
}

#[test]
fn recovered_multipliers_reproduce_the_reduced_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A1);
    let cfg = SolverConfig::default();
    for _ in 0..15 {
        let l = rng.random_range(4..=25);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..l {
            rows.push(vec![
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            labels.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        let data = Dataset::from_rows(rows, labels).unwrap();
        let k = gram(&KernelSpec::rbf(1.0).unwrap(), &data);
        let weights = class_weights(data.labels(), 0.7).unwrap();
        let t = rng.random_range(-0.95..0.95);
        let tau = Tau::new(t).unwrap();
        let q = label_scaled_gram(&k, data.labels()).unwrap();
        let qp = reduce_unified(&weights, tau, q, data.labels()).unwrap();
        let sol = solve_smo(&qp, &cfg).unwrap();

        let ab = recover_alpha_beta(&sol.lambda, &weights, tau).unwrap();
        for i in 0..l {
            assert!(ab.alpha[i] >= -1e-12);
            assert!(ab.beta[i] >= -1e-12);
        }
        let s = SignumTau::of(tau).value();
        let paper_form = unreduced_objective(&ab.alpha, &ab.beta, s, &k, data.labels());
        assert!(
            (paper_form - sol.objective).abs() <= 1e-9 * (1.0 + sol.objective.abs()),
            "substitution identity violated: {} vs {}",
            paper_form,
            sol.objective
        );
    }
}

#[test]
fn incorrect_negative_solution_is_feasible_for_its_unreduced_problem() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBAD);
    let cfg = SolverConfig::default();
    for _ in 0..10 {
        let l = rng.random_range(4..=20);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..l {
            rows.push(vec![rng.random_range(-1.0..1.0)]);
            labels.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        let data = Dataset::from_rows(rows, labels).unwrap();
        let k = gram(&KernelSpec::rbf(0.8).unwrap(), &data);
        let weights = class_weights(data.labels(), 1.0).unwrap();
        let t = rng.random_range(-0.9..-0.1);
        let tau = Tau::new(t).unwrap();
        let q = label_scaled_gram(&k, data.labels()).unwrap();
        let qp = build_incorrect_negative(&weights, tau, q, data.labels()).unwrap();
        let sol = solve_smo(&qp, &cfg).unwrap();
        // lambda >= C elementwise: the legacy coupling forces alpha >= C.
        for i in 0..l {
            assert!(sol.lambda[i] >= weights.get(i) - 1e-9);
            // alpha = (lambda + tau C)/(1+tau) >= C, beta = tau (C - alpha) >= 0.
            let a = (sol.lambda[i] + t * weights.get(i)) / (1.0 + t);
            assert!(a >= weights.get(i) - 1e-8);
            let b = t * (weights.get(i) - a);
            assert!(b >= -1e-8);
            // The legacy coupling C - alpha - beta/tau = 0 holds.
            assert!((weights.get(i) - a - b / t).abs() <= 1e-8);
        }
    }
}

#[test]
fn unified_primal_never_exceeds_the_incorrect_baseline() {
    // The corrected problem minimizes the pinball risk in the true sense:
    // its primal value at the solved multipliers must not exceed the
    // legacy negative-tau solution's, and must beat it strictly somewhere.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7EA);
    let cfg = SolverConfig::default();
    let taus = [-0.9, -0.5, -0.1];
    let mut strict = 0usize;
    for trial in 0..20 {
        let l = rng.random_range(6..=30);
        let d = rng.random_range(1..=4);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..l {
            rows.push(
                (0..d)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect::<Vec<f64>>(),
            );
            labels.push(if i < 2 {
                [1.0, -1.0][i]
            } else if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            });
        }
        let data = Dataset::from_rows(rows, labels).unwrap();
        let k = gram(&KernelSpec::rbf(1.0).unwrap(), &data);
        let weights = class_weights(data.labels(), 1.5).unwrap();
        let tau = Tau::new(taus[trial % taus.len()]).unwrap();
        let y = data.labels();

        let q = label_scaled_gram(&k, y).unwrap();
        let qp_uni = reduce_unified(&weights, tau, q.clone(), y).unwrap();
        let qp_inc = build_incorrect_negative(&weights, tau, q, y).unwrap();
        let sol_uni = solve_smo(&qp_uni, &cfg).unwrap();
        let sol_inc = solve_smo(&qp_inc, &cfg).unwrap();

        let thresholds: Vec<f64> = weights.values().iter().map(|&c| 1e-6 * c).collect();
        let b_uni = bias(&sol_uni.lambda, &weights, tau, &k, y, 1e-6);
        let b_inc = pinsvm_core::model::bias_in_box(
            &sol_inc.lambda,
            &qp_inc.lower,
            &qp_inc.upper,
            &thresholds,
            &k,
            y,
        );
        let p_uni = primal_objective(&sol_uni.lambda, b_uni, &k, y, &weights, tau).unwrap();
        let p_inc = primal_objective(&sol_inc.lambda, b_inc, &k, y, &weights, tau).unwrap();
        assert!(
            p_uni <= p_inc + 1e-8,
            "trial {trial}: unified primal {p_uni} exceeds incorrect baseline {p_inc}"
        );
        if p_inc - p_uni > 1e-4 {
            strict += 1;
        }
    }
    assert!(strict >= 1, "no instance showed a strict improvement");
}
