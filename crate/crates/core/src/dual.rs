//! Dual problem construction.
//!
//! Each Pin-SVM formulation is a quadratic program in multiplier pairs
//! `(alpha_i, beta_i)` coupled by one linear constraint per sample.
//! Eliminating `beta` through that constraint leaves a single variable
//! `lambda_i` per sample, and every formulation lands in the same canonical
//! shape: minimize `1/2 lambda' Q lambda - 1' lambda` over a box with one
//! equality constraint `y' lambda = 0`. One solver then covers them all,
//! and the positive/negative-`tau` equivalences become literal data
//! equalities on the built problems.
//!
//! For the corrected formulations the box is `[-tau*C_i, C_i]`, valid for
//! every `tau` in `[-1, 1]`: at `tau = 0` it degenerates to the C-SVM box
//! `[0, C_i]`, and at `tau = -1` it collapses to the single point
//! `lambda = C`. The legacy negative-`tau` problem eliminates to the
//! unbounded box `[C_i, inf)`, which is kept only as a comparison baseline
//! and capped at `INCORRECT_CAP_FACTOR * C_i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::WeightVector;
use crate::error::Error;
use crate::loss::Tau;
use crate::matrix::SquareMatrix;
use crate::Result;

/// Upper bound stand-in for the legacy negative-`tau` problem, whose
/// eliminated feasible region is unbounded above: `upper_i = cap * C_i`.
/// Solutions that touch the cap indicate an unbounded run and are flagged
/// in solver diagnostics.
pub const INCORRECT_CAP_FACTOR: f64 = 1e6;

/// Sign of `tau` as used by the unified dual: +1 for `tau >= 0`, -1
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignumTau {
    s: i8,
}

impl SignumTau {
    pub fn of(tau: Tau) -> Self {
        SignumTau {
            s: if tau.value() >= 0.0 { 1 } else { -1 },
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.s as f64
    }
}

/// Which dual QPP to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Single QPP valid for all `tau` in `[-1, 1]`.
    Unified,
    /// The established positive-`tau` dual; requires `tau >= 0`.
    LegacyPositive,
    /// The corrected negative-`tau` dual; requires `tau < 0`.
    CorrectedNegative,
    /// The legacy (incorrect) negative-`tau` dual kept as a comparison
    /// baseline; requires `-1 < tau < 0`.
    IncorrectNegative,
}

impl Formulation {
    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Unified => "unified",
            Formulation::LegacyPositive => "legacy-pos",
            Formulation::CorrectedNegative => "corrected-neg",
            Formulation::IncorrectNegative => "incorrect-neg",
        }
    }

    /// Whether this formulation is defined at the given `tau`.
    pub fn accepts(&self, tau: Tau) -> bool {
        let t = tau.value();
        match self {
            Formulation::Unified => true,
            Formulation::LegacyPositive => t >= 0.0,
            Formulation::CorrectedNegative => t < 0.0,
            Formulation::IncorrectNegative => t < 0.0 && t > -1.0,
        }
    }
}

impl core::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unified" => Ok(Formulation::Unified),
            "legacy-pos" => Ok(Formulation::LegacyPositive),
            "corrected-neg" => Ok(Formulation::CorrectedNegative),
            "incorrect-neg" => Ok(Formulation::IncorrectNegative),
            other => Err(Error::param(
                "formulation",
                alloc::string::String::from(other),
            )),
        }
    }
}

/// Canonical reduced dual: minimize `1/2 x' Q x + linear' x` subject to
/// `lower <= x <= upper` and `eq_coeffs' x = eq_rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxQP {
    pub q: SquareMatrix,
    pub linear: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub eq_coeffs: Vec<f64>,
    pub eq_rhs: f64,
}

impl BoxQP {
    /// Validates sizes, bound ordering, and symmetry of `Q`.
    pub fn new(
        q: SquareMatrix,
        linear: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        eq_coeffs: Vec<f64>,
        eq_rhs: f64,
    ) -> Result<Self> {
        let n = q.n();
        for (len, what) in [
            (linear.len(), "linear term"),
            (lower.len(), "lower bounds"),
            (upper.len(), "upper bounds"),
            (eq_coeffs.len(), "equality coefficients"),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                    what,
                });
            }
        }
        if let Some(i) = (0..n).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InfeasibleBox { index: i });
        }
        if q.asymmetry() > 1e-12 {
            return Err(Error::param("Q", "matrix must be symmetric"));
        }
        Ok(BoxQP {
            q,
            linear,
            lower,
            upper,
            eq_coeffs,
            eq_rhs,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.linear.len()
    }

    /// Objective `1/2 x' Q x + linear' x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        0.5 * self.q.quad_form(x) + crate::matrix::dot(&self.linear, x)
    }
}

fn check_sizes(weights: &WeightVector, q: &SquareMatrix, y: &[f64]) -> Result<()> {
    let l = q.n();
    if weights.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: weights.len(),
            what: "weights",
        });
    }
    if y.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: y.len(),
            what: "labels",
        });
    }
    Ok(())
}

/// Unified dual for any `tau` in `[-1, 1]`.
///
/// Starting from the multiplier form with constraints
/// `C_i - alpha_i - beta_i/|tau| = 0`, `alpha, beta >= 0`, the substitution
/// `beta_i = |tau| (C_i - alpha_i)` and `lambda_i = alpha_i - s_tau beta_i
/// = (1+tau) alpha_i - tau C_i` yields bounds `[-tau C_i, C_i]` with the
/// objective `1/2 lambda' Q lambda - 1' lambda` and `y' lambda = 0`. At
/// `tau = 0` the coupling forces `beta = 0` and the box is `[0, C_i]`.
pub fn reduce_unified(
    weights: &WeightVector,
    tau: Tau,
    q: SquareMatrix,
    y: &[f64],
) -> Result<BoxQP> {
    check_sizes(weights, &q, y)?;
    let t = tau.value();
    let lower: Vec<f64> = weights.values().iter().map(|&c| -t * c).collect();
    let upper: Vec<f64> = weights.values().to_vec();
    let linear = vec![-1.0; q.n()];
    BoxQP::new(q, linear, lower, upper, y.to_vec(), 0.0)
}

/// The established dual for `tau >= 0` (rejects negative `tau`).
///
/// Eliminating `beta_i = tau (C_i - alpha_i)` from
/// `C_i - alpha_i - beta_i/tau = 0` and setting
/// `lambda_i = alpha_i - beta_i` gives the same box `[-tau C_i, C_i]`; the
/// construction is kept separate from [`reduce_unified`] so their equality
/// stays an observable fact rather than shared code.
pub fn reduce_legacy_positive(
    weights: &WeightVector,
    tau: Tau,
    q: SquareMatrix,
    y: &[f64],
) -> Result<BoxQP> {
    if tau.is_negative() {
        return Err(Error::TauSignMismatch {
            formulation: Formulation::LegacyPositive.name(),
            tau: tau.value(),
        });
    }
    check_sizes(weights, &q, y)?;
    let t = tau.value();
    // alpha = 0 gives lambda = -tau C_i; alpha = C_i gives lambda = C_i.
    let lower: Vec<f64> = weights.values().iter().map(|&c| -(t * c)).collect();
    let upper: Vec<f64> = weights.values().to_vec();
    let linear = vec![-1.0; q.n()];
    BoxQP::new(q, linear, lower, upper, y.to_vec(), 0.0)
}

/// The corrected dual for `tau < 0` (rejects `tau >= 0`).
///
/// Here `lambda_i = alpha_i + beta_i` with `beta_i = |tau| (C_i - alpha_i)`,
/// giving strictly positive lower bounds `|tau| C_i` and upper bounds `C_i`.
/// At `tau = -1` the box collapses to the single point `lambda = C`, which
/// is feasible exactly when the weighted label sums balance.
pub fn reduce_corrected_negative(
    weights: &WeightVector,
    tau: Tau,
    q: SquareMatrix,
    y: &[f64],
) -> Result<BoxQP> {
    if !tau.is_negative() {
        return Err(Error::TauSignMismatch {
            formulation: Formulation::CorrectedNegative.name(),
            tau: tau.value(),
        });
    }
    check_sizes(weights, &q, y)?;
    let abs_t = tau.value().abs();
    let lower: Vec<f64> = weights.values().iter().map(|&c| abs_t * c).collect();
    let upper: Vec<f64> = weights.values().to_vec();
    let linear = vec![-1.0; q.n()];
    BoxQP::new(q, linear, lower, upper, y.to_vec(), 0.0)
}

/// The legacy negative-`tau` QPP, reduced under the same elimination; kept
/// only as the comparison baseline. Rejects `tau >= 0` and `tau = -1`.
///
/// Its coupling `C_i - alpha_i - beta_i/tau = 0` with `tau < 0` forces
/// `beta_i = tau (C_i - alpha_i) >= 0`, i.e. `alpha_i >= C_i`, so
/// `lambda_i = (1+tau) alpha_i - tau C_i` ranges over `[C_i, inf)`. The
/// upper bound is capped at [`INCORRECT_CAP_FACTOR`]` * C_i`.
pub fn build_incorrect_negative(
    weights: &WeightVector,
    tau: Tau,
    q: SquareMatrix,
    y: &[f64],
) -> Result<BoxQP> {
    let t = tau.value();
    if t >= 0.0 || t == -1.0 {
        return Err(Error::TauSignMismatch {
            formulation: Formulation::IncorrectNegative.name(),
            tau: t,
        });
    }
    check_sizes(weights, &q, y)?;
    let lower: Vec<f64> = weights.values().to_vec();
    let upper: Vec<f64> = weights
        .values()
        .iter()
        .map(|&c| INCORRECT_CAP_FACTOR * c)
        .collect();
    let linear = vec![-1.0; q.n()];
    BoxQP::new(q, linear, lower, upper, y.to_vec(), 0.0)
}

/// Builds the reduced dual for the requested formulation.
pub fn build(
    formulation: Formulation,
    weights: &WeightVector,
    tau: Tau,
    q: SquareMatrix,
    y: &[f64],
) -> Result<BoxQP> {
    match formulation {
        Formulation::Unified => reduce_unified(weights, tau, q, y),
        Formulation::LegacyPositive => reduce_legacy_positive(weights, tau, q, y),
        Formulation::CorrectedNegative => reduce_corrected_negative(weights, tau, q, y),
        Formulation::IncorrectNegative => build_incorrect_negative(weights, tau, q, y),
    }
}

/// Multipliers of the un-reduced dual, recovered from `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBeta {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Inverts the unified substitution: `alpha_i = (lambda_i + tau C_i)/(1+tau)`
/// and `beta_i = |tau| (C_i - alpha_i)`.
///
/// `lambda` is expected inside the unified box to within 1e-8; values are
/// clamped to the box before recovery so solver-level bound violations do
/// not leak sign errors into `alpha`/`beta`. At `tau = -1` the substitution
/// is singular and recovery reports [`Error::AlphaIndeterminate`].
pub fn recover_alpha_beta(lambda: &[f64], weights: &WeightVector, tau: Tau) -> Result<AlphaBeta> {
    let t = tau.value();
    if t == -1.0 {
        return Err(Error::AlphaIndeterminate);
    }
    if lambda.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: lambda.len(),
            what: "lambda",
        });
    }
    let abs_t = t.abs();
    let mut alpha = Vec::with_capacity(lambda.len());
    let mut beta = Vec::with_capacity(lambda.len());
    for (&v, &c) in lambda.iter().zip(weights.values()) {
        let (lo, up) = (-t * c, c);
        debug_assert!(
            v >= lo - 1e-8 && v <= up + 1e-8,
            "lambda outside unified box beyond tolerance"
        );
        let clamped = v.clamp(lo, up);
        let a = ((clamped + t * c) / (1.0 + t)).clamp(0.0, c);
        alpha.push(a);
        beta.push(abs_t * (c - a));
    }
    Ok(AlphaBeta { alpha, beta })
}
