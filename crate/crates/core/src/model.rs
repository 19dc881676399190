//! End-to-end training, bias computation, prediction, and accuracy.
//!
//! Training runs the pipeline: class weights, Gram matrix, reduced dual of
//! the requested formulation, pair solver, bias. At `tau = -1` the box
//! collapses to a point, so the solver is bypassed: `lambda = C` is forced
//! (after an equality feasibility check) and only the bias is fitted.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::data::{class_weights, Dataset, WeightVector};
pub use crate::dual::Formulation;
use crate::dual::{self, INCORRECT_CAP_FACTOR};
use crate::error::Error;
use crate::kernel::{gram, kernel_eval, label_scaled_gram, GramMatrix, KernelSpec};
use crate::loss::Tau;
use crate::solver::{kkt_residual, solve_smo, DualSolution, SolverConfig};
use crate::Result;

/// Relative (to `C_i`) interior margin below which a multiplier does not
/// count as a free support vector for bias averaging.
const SUPPORT_TOL: f64 = 1e-6;

/// Multipliers smaller than this are dropped from the stored model.
const RETAIN_TOL: f64 = 1e-12;

/// Everything `train` needs to know.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub c0: f64,
    pub tau: Tau,
    pub kernel: KernelSpec,
    pub formulation: Formulation,
    pub solver: SolverConfig,
    /// Apply the per-class penalty weights; uniform `C0` otherwise.
    pub weighting: bool,
}

impl TrainConfig {
    pub fn new(c0: f64, tau: Tau, kernel: KernelSpec) -> Self {
        TrainConfig {
            c0,
            tau,
            kernel,
            formulation: Formulation::Unified,
            solver: SolverConfig::default(),
            weighting: true,
        }
    }

    pub fn with_formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_weighting(mut self, weighting: bool) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c0.is_finite() || self.c0 <= 0.0 {
            return Err(Error::param("C0", self.c0.to_string()));
        }
        if !self.formulation.accepts(self.tau) {
            return Err(Error::TauSignMismatch {
                formulation: self.formulation.name(),
                tau: self.tau.value(),
            });
        }
        self.solver.validate()
    }
}

/// Solver outcome recorded with a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub objective: f64,
    pub iterations: u64,
    pub kkt_residual: f64,
    pub converged: bool,
    /// Cap applied to the legacy negative-`tau` box, when that formulation
    /// ran. Runs where a multiplier reached the cap were unbounded in the
    /// un-capped problem.
    pub upper_cap: Option<f64>,
    pub cap_reached: bool,
}

/// A trained classifier: retained samples, label-folded coefficients
/// `lambda_i y_i`, and the bias. The decision value of `x` is
/// `sum_j coeffs_j K(x_j, x) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kernel: KernelSpec,
    n_features: usize,
    support_x: Vec<f64>,
    coeffs: Vec<f64>,
    bias: f64,
    config: TrainConfig,
    diagnostics: SolveDiagnostics,
}

impl Model {
    /// Reassembles a model from its stored parts (used by persistence).
    pub fn from_parts(
        kernel: KernelSpec,
        n_features: usize,
        support_x: Vec<f64>,
        coeffs: Vec<f64>,
        bias: f64,
        config: TrainConfig,
        diagnostics: SolveDiagnostics,
    ) -> Result<Self> {
        if n_features == 0 || coeffs.len() * n_features != support_x.len() {
            return Err(Error::DimensionMismatch {
                expected: coeffs.len() * n_features,
                got: support_x.len(),
                what: "support samples",
            });
        }
        Ok(Model {
            kernel,
            n_features,
            support_x,
            coeffs,
            bias,
            config,
            diagnostics,
        })
    }

    #[inline]
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn support_row(&self, i: usize) -> &[f64] {
        &self.support_x[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn diagnostics(&self) -> &SolveDiagnostics {
        &self.diagnostics
    }

    /// Explicit weight vector for linear-kernel models; `None` for RBF.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        match self.kernel {
            KernelSpec::Linear => {
                let mut w = alloc::vec![0.0; self.n_features];
                for (i, &c) in self.coeffs.iter().enumerate() {
                    for (wj, xj) in w.iter_mut().zip(self.support_row(i)) {
                        *wj += c * xj;
                    }
                }
                Some(w)
            }
            KernelSpec::Rbf { .. } => None,
        }
    }
}

/// Trains a model on `train_set` per the configured formulation.
pub fn train(train_set: &Dataset, cfg: &TrainConfig) -> Result<Model> {
    cfg.validate()?;
    let (n_pos, n_neg) = train_set.class_counts();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateClasses);
    }
    let y = train_set.labels();
    let weights = if cfg.weighting {
        class_weights(y, cfg.c0)?
    } else {
        WeightVector::uniform(cfg.c0, train_set.len())?
    };

    let k = gram(&cfg.kernel, train_set);
    let q = label_scaled_gram(&k, y)?;
    let qp = dual::build(cfg.formulation, &weights, cfg.tau, q, y)?;

    let at_point_box = cfg.tau.value() == -1.0
        && matches!(
            cfg.formulation,
            Formulation::Unified | Formulation::CorrectedNegative
        );
    let solution = if at_point_box {
        // The box is the single point lambda = C. Verify the equality
        // constraint is attainable there and skip the solver.
        let imbalance: f64 = y.iter().zip(weights.values()).map(|(&yi, &c)| yi * c).sum();
        let scale: f64 = weights.values().iter().sum();
        if imbalance.abs() > 1e-10 * (1.0 + scale) {
            return Err(Error::InfeasibleEquality);
        }
        let lambda = qp.upper.clone();
        let objective = qp.objective(&lambda);
        let kkt = kkt_residual(&qp, &lambda);
        DualSolution {
            lambda,
            objective,
            iterations: 0,
            kkt_residual: kkt,
            converged: true,
        }
    } else {
        solve_smo(&qp, &cfg.solver)?
    };

    let thresholds: Vec<f64> = weights.values().iter().map(|&c| SUPPORT_TOL * c).collect();
    let b = bias_in_box(&solution.lambda, &qp.lower, &qp.upper, &thresholds, &k, y);

    let mut support_x = Vec::new();
    let mut coeffs = Vec::new();
    for i in 0..train_set.len() {
        if solution.lambda[i].abs() > RETAIN_TOL {
            support_x.extend_from_slice(train_set.row(i));
            coeffs.push(solution.lambda[i] * y[i]);
        }
    }

    let (upper_cap, cap_reached) = if cfg.formulation == Formulation::IncorrectNegative {
        let reached = solution
            .lambda
            .iter()
            .zip(&qp.upper)
            .any(|(&v, &up)| v >= up * (1.0 - 1e-9));
        (Some(INCORRECT_CAP_FACTOR), reached)
    } else {
        (None, false)
    };

    Ok(Model {
        kernel: cfg.kernel,
        n_features: train_set.n_features(),
        support_x,
        coeffs,
        bias: b,
        config: cfg.clone(),
        diagnostics: SolveDiagnostics {
            objective: solution.objective,
            iterations: solution.iterations,
            kkt_residual: solution.kkt_residual,
            converged: solution.converged,
            upper_cap,
            cap_reached,
        },
    })
}

/// Bias from the solved multipliers: the mean of `y_i - sum_j lambda_j y_j
/// K_ji` over the support set `S` of strictly interior multipliers (both
/// recovered `alpha_i` and `beta_i` positive). With `S` empty, the KKT
/// conditions still bracket the bias through the bound multipliers, and
/// the bracket midpoint keeps the primal-dual gap tight. Only when no
/// coordinate constrains the bias at all — guaranteed at `tau = -1`, where
/// the box is a point — does the bias fall back to the training-accuracy
/// scan over decision-value midpoints, breaking ties toward the smaller
/// `|b|`.
pub fn bias(
    lambda: &[f64],
    weights: &WeightVector,
    tau: Tau,
    gram: &GramMatrix,
    y: &[f64],
    tol: f64,
) -> f64 {
    let t = tau.value();
    let lower: Vec<f64> = weights.values().iter().map(|&c| -t * c).collect();
    let upper: Vec<f64> = weights.values().to_vec();
    let thresholds: Vec<f64> = weights.values().iter().map(|&c| tol * c).collect();
    bias_in_box(lambda, &lower, &upper, &thresholds, gram, y)
}

/// [`bias`] against explicit box bounds. The legacy negative-`tau`
/// baseline lives in a different box than the unified dual, so its support
/// set must be judged against its own bounds.
pub fn bias_in_box(
    lambda: &[f64],
    lower: &[f64],
    upper: &[f64],
    thresholds: &[f64],
    gram: &GramMatrix,
    y: &[f64],
) -> f64 {
    let l = lambda.len();
    // Decision values without bias: d_i = sum_j lambda_j y_j K_ji.
    let mut d = alloc::vec![0.0; l];
    for i in 0..l {
        let row = gram.row(i);
        let mut acc = 0.0;
        for j in 0..l {
            acc += lambda[j] * y[j] * row[j];
        }
        d[i] = acc;
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..l {
        if lambda[i] - lower[i] > thresholds[i] && upper[i] - lambda[i] > thresholds[i] {
            sum += y[i] - d[i];
            count += 1;
        }
    }
    if count > 0 {
        return sum / count as f64;
    }

    // No interior multiplier. Bound multipliers still bracket the optimal
    // bias: coordinates with room upward in the y-direction force
    // y_i - d_i <= b, those with room downward force y_i - d_i >= b.
    let mut bracket_lo = f64::NEG_INFINITY;
    let mut bracket_hi = f64::INFINITY;
    for i in 0..l {
        let room_above = upper[i] - lambda[i] > thresholds[i];
        let room_below = lambda[i] - lower[i] > thresholds[i];
        let up = if y[i] > 0.0 { room_above } else { room_below };
        let low = if y[i] > 0.0 { room_below } else { room_above };
        let candidate = y[i] - d[i];
        if up {
            bracket_lo = bracket_lo.max(candidate);
        }
        if low {
            bracket_hi = bracket_hi.min(candidate);
        }
    }
    match (bracket_lo.is_finite(), bracket_hi.is_finite()) {
        (true, true) => return 0.5 * (bracket_lo + bracket_hi),
        (true, false) => return bracket_lo,
        (false, true) => return bracket_hi,
        (false, false) => {}
    }

    // Point box (tau = -1): nothing constrains the bias; scan thresholds t
    // between sorted decision values for best training accuracy; predict
    // +1 iff d_i >= t, i.e. b = -t.
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut candidates = Vec::with_capacity(sorted.len() + 1);
    candidates.push(sorted[0] - 1.0);
    for w in sorted.windows(2) {
        candidates.push(0.5 * (w[0] + w[1]));
    }
    candidates.push(sorted[sorted.len() - 1] + 1.0);

    let mut best_b = 0.0_f64;
    let mut best_correct = 0usize;
    let mut have = false;
    for &t in &candidates {
        let correct = (0..l)
            .filter(|&i| {
                let pred = if d[i] >= t { 1.0 } else { -1.0 };
                pred == y[i]
            })
            .count();
        let b = -t;
        if !have || correct > best_correct || (correct == best_correct && b.abs() < best_b.abs()) {
            best_b = b;
            best_correct = correct;
            have = true;
        }
    }
    best_b
}

/// Raw decision value `sum_j coeffs_j K(x_j, x) + bias`.
pub fn decision_value(model: &Model, x: &[f64]) -> Result<f64> {
    if x.len() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: x.len(),
            what: "feature vector",
        });
    }
    let mut acc = model.bias;
    for (i, &c) in model.coeffs.iter().enumerate() {
        acc += c * kernel_eval(&model.kernel, model.support_row(i), x)?;
    }
    Ok(acc)
}

/// Predicted label: the sign of the decision value, with `sign(0) = +1`.
pub fn predict(model: &Model, x: &[f64]) -> Result<f64> {
    let v = decision_value(model, x)?;
    Ok(if v >= 0.0 { 1.0 } else { -1.0 })
}

/// Fraction of `test` samples whose predicted label matches.
pub fn accuracy(model: &Model, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyDataset("accuracy needs a nonempty test set"));
    }
    let mut correct = 0usize;
    for i in 0..test.len() {
        if predict(model, test.row(i))? == test.labels()[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}
