//! Model-level contracts: the Hinge reduction at `tau = 0`, the
//! formulation equivalences, non-sparsity for negative `tau`, and the
//! primal-dual gap of solved models.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinsvm_core::data::{class_weights, Dataset};
use pinsvm_core::dual::{
    reduce_corrected_negative, reduce_legacy_positive, reduce_unified, BoxQP, Formulation,
};
use pinsvm_core::kernel::{gram, label_scaled_gram, GramMatrix, KernelSpec};
use pinsvm_core::loss::{primal_objective, Tau};
use pinsvm_core::model::{accuracy, bias, train, TrainConfig};
use pinsvm_core::solver::{solve_reference, solve_smo, SolverConfig};

fn random_dataset(rng: &mut ChaCha8Rng, max_l: usize) -> Dataset {
    let l = rng.random_range(6..=max_l);
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
    Dataset::from_rows(rows, labels).unwrap()
}

#[test]
fn tau_zero_matches_an_independent_csvm_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5517);
    let cfg = SolverConfig {
        tol: 1e-9,
        ..Default::default()
    };
    for trial in 0..10 {
        let data = random_dataset(&mut rng, 40);
        let y = data.labels();
        let spec = KernelSpec::rbf(1.0).unwrap();
        let k = gram(&spec, &data);
        let weights = class_weights(y, 2.0).unwrap();
        let tau = Tau::new(0.0).unwrap();

        // Pipeline under test.
        let q = label_scaled_gram(&k, y).unwrap();
        let qp = reduce_unified(&weights, tau, q.clone(), y).unwrap();
        let sol = solve_smo(&qp, &cfg).unwrap();
        let b = bias(&sol.lambda, &weights, tau, &k, y, 1e-6);

        // Independent standard C-SVM dual: box [0, C_i] assembled directly
        // and solved by the reference method.
        let csvm = BoxQP::new(
            q,
            vec![-1.0; data.len()],
            vec![0.0; data.len()],
            weights.values().to_vec(),
            y.to_vec(),
            0.0,
        )
        .unwrap();
        let ref_sol = solve_reference(&csvm, &cfg).unwrap();
        let ref_b = bias(&ref_sol.lambda, &weights, tau, &k, y, 1e-6);

        for i in 0..data.len() {
            let f_a = decision(&sol.lambda, b, &k, y, i);
            let f_b = decision(&ref_sol.lambda, ref_b, &k, y, i);
            assert!(
                (f_a - f_b).abs() <= 1e-5,
                "trial {trial}: decision values differ at {i}: {f_a} vs {f_b}"
            );
        }
    }
}

fn decision(lambda: &[f64], b: f64, k: &GramMatrix, y: &[f64], i: usize) -> f64 {
    let mut f = b;
    for j in 0..y.len() {
        f += lambda[j] * y[j] * k.get(j, i);
    }
    f
}

#[test]
fn formulations_build_identical_problems_and_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0F0);
    let cfg = SolverConfig::default();
    for _ in 0..20 {
        let data = random_dataset(&mut rng, 30);
        let y = data.labels();
        let k = gram(&KernelSpec::rbf(0.8).unwrap(), &data);
        let q = label_scaled_gram(&k, y).unwrap();
        let weights = class_weights(y, 0.5).unwrap();

        let t_pos = Tau::new(rng.random_range(0.0..=1.0)).unwrap();
        let a = reduce_unified(&weights, t_pos, q.clone(), y).unwrap();
        let b = reduce_legacy_positive(&weights, t_pos, q.clone(), y).unwrap();
        assert_eq!(a, b, "positive-tau duals must be field-identical");
        let sa = solve_smo(&a, &cfg).unwrap();
        let sb = solve_smo(&b, &cfg).unwrap();
        for i in 0..y.len() {
            assert!((sa.lambda[i] - sb.lambda[i]).abs() <= 1e-8);
        }

        let t_neg = Tau::new(rng.random_range(-1.0..-0.01)).unwrap();
        let c = reduce_unified(&weights, t_neg, q.clone(), y).unwrap();
        let d = reduce_corrected_negative(&weights, t_neg, q.clone(), y).unwrap();
        assert_eq!(c, d, "negative-tau duals must be field-identical");
        let sc = solve_smo(&c, &cfg).unwrap();
        let sd = solve_smo(&d, &cfg).unwrap();
        for i in 0..y.len() {
            assert!((sc.lambda[i] - sd.lambda[i]).abs() <= 1e-8);
        }
    }
}

#[test]
fn every_multiplier_is_active_for_negative_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACE);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 30);
        let tau = Tau::new(rng.random_range(-0.95..-0.05)).unwrap();
        let cfg = TrainConfig::new(1.0, tau, KernelSpec::rbf(1.0).unwrap());
        let model = train(&data, &cfg).unwrap();
        // lambda_i >= -tau C_i > 0: nothing is dropped, no sparsity.
        assert_eq!(model.support_len(), data.len());
        for (i, &c) in model.coeffs().iter().enumerate() {
            let c_i = model.config().c0
                * if data.labels()[i] > 0.0 {
                    1.0
                } else {
                    let (np, nn) = data.class_counts();
                    np as f64 / nn as f64
                };
            assert!(c.abs() >= -tau.value() * c_i - 1e-9);
        }
    }
}

#[test]
fn primal_dual_gap_is_small_for_solved_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1A6);
    let cfg = SolverConfig {
        tol: 1e-8,
        ..Default::default()
    };
    for trial in 0..15 {
        let data = random_dataset(&mut rng, 40);
        let y = data.labels();
        let k = gram(&KernelSpec::rbf(1.2).unwrap(), &data);
        let weights = class_weights(y, 1.0).unwrap();
        let tau = Tau::new([-1.0, -0.6, -0.2, 0.0, 0.3, 1.0][trial % 6]).unwrap();
        let q = label_scaled_gram(&k, y).unwrap();
        let qp = reduce_unified(&weights, tau, q, y).unwrap();
        let sol = solve_smo(&qp, &cfg).unwrap();
        assert!(sol.converged);
        let b = bias(&sol.lambda, &weights, tau, &k, y, 1e-6);
        let primal = primal_objective(&sol.lambda, b, &k, y, &weights, tau).unwrap();
        // The dual here is a minimization of the negated dual function, so
        // optimality means primal + dual ~ 0, primal >= -dual up to bias slack.
        let gap = (primal + sol.objective).abs() / primal.abs().max(1.0);
        assert!(
            gap <= 1e-3,
            "trial {trial} (tau={}): relative gap {gap}",
            tau.value()
        );
        assert!(primal + sol.objective >= -1e-8, "weak duality violated");
    }
}

#[test]
fn tau_minus_one_primal_is_independent_of_bias() {
    // At tau = -1 the pinball loss is linear (max(u, u) = u) and the
    // weighted label sums cancel the bias out of the primal entirely.
    let data = Dataset::from_rows(
        vec![vec![0.1], vec![0.9], vec![-0.4], vec![-1.1], vec![0.3]],
        vec![1.0, 1.0, -1.0, -1.0, 1.0],
    )
    .unwrap();
    let y = data.labels();
    let k = gram(&KernelSpec::Linear, &data);
    let weights = class_weights(y, 1.0).unwrap();
    let tau = Tau::new(-1.0).unwrap();
    let lambda = weights.values().to_vec();
    let p0 = primal_objective(&lambda, 0.0, &k, y, &weights, tau).unwrap();
    let p1 = primal_objective(&lambda, 17.3, &k, y, &weights, tau).unwrap();
    assert!((p0 - p1).abs() <= 1e-9 * p0.abs().max(1.0));
}

#[test]
fn accuracy_runs_against_a_holdout() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    // Separable data: positive class shifted right.
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..30 {
        let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
        rows.push(vec![rng.random_range(0.0..1.0) + y * 2.0]);
        labels.push(y);
    }
    let data = Dataset::from_rows(rows, labels).unwrap();
    let (train_set, test_set) = pinsvm_core::data::split(&data, 20, 5).unwrap();
    let cfg = TrainConfig::new(10.0, Tau::new(0.0).unwrap(), KernelSpec::Linear);
    let model = train(&train_set, &cfg).unwrap();
    assert_eq!(accuracy(&model, &test_set).unwrap(), 1.0);
}

#[test]
fn incorrect_negative_flags_cap_hits() {
    // Duplicated feature rows make the Gram singular, driving the legacy
    // problem toward its cap.
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..12 {
        rows.push(vec![(i / 2) as f64 / 6.0, 0.5]);
        labels.push(if i % 2 == 0 { 1.0 } else { -1.0 });
    }
    rows.push(vec![0.9, 0.5]);
    labels.push(1.0);
    rows.push(vec![0.95, 0.5]);
    labels.push(-1.0);
    let data = Dataset::from_rows(rows, labels).unwrap();
    let tau = Tau::new(-0.7).unwrap();
    let cfg = TrainConfig::new(1.0, tau, KernelSpec::Linear)
        .with_formulation(Formulation::IncorrectNegative)
        .with_solver(SolverConfig {
            max_iter: 500_000,
            ..Default::default()
        });
    let model = train(&data, &cfg).unwrap();
    let diag = model.diagnostics();
    assert_eq!(diag.upper_cap, Some(1e6));
}
