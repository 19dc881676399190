//! Pinball loss and primal-objective evaluation.
//!
//! The primal objective is computed through the dual expansion of `w`
//! (never an explicit weight vector), so linear and kernel models share one
//! code path. It backs the duality-gap checks and the comparison between
//! the corrected and legacy negative-`tau` formulations.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::WeightVector;
use crate::error::Error;
use crate::kernel::GramMatrix;
use crate::Result;

/// Pinball asymmetry parameter, restricted to the convexity range `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau(f64);

impl Tau {
    pub fn new(value: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&value) || value.is_nan() {
            return Err(Error::TauOutOfRange(value));
        }
        Ok(Tau(value))
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_negative(&self) -> bool {
        self.0 < 0.0
    }
}

/// `max(u, -tau*u)`: equals `u` for `u >= 0` and `-tau*u` otherwise. At
/// `tau = 0` this is the Hinge loss; at `tau = 1` the absolute loss. For
/// `tau < 0` the value is negative on negative residuals.
#[inline]
pub fn pinball(u: f64, tau: Tau) -> f64 {
    u.max(-tau.0 * u)
}

/// Margin residuals `u_i = 1 - y_i (sum_j lambda_j y_j K_ji + b)` of a dual
/// expansion.
pub fn margin_residuals(lambda: &[f64], b: f64, gram: &GramMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let l = gram.n();
    if lambda.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: lambda.len(),
            what: "lambda",
        });
    }
    if y.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: y.len(),
            what: "labels",
        });
    }
    let mut u = vec![0.0; l];
    for i in 0..l {
        let row = gram.row(i);
        let mut f = b;
        for j in 0..l {
            f += lambda[j] * y[j] * row[j];
        }
        u[i] = 1.0 - y[i] * f;
    }
    Ok(u)
}

/// Primal value `1/2 lambda' Q lambda + sum_i C_i pinball(u_i, tau)` with
/// `Q = (y y') .* K`; the quadratic term equals `1/2 ||w||^2` under the
/// dual expansion of `w`.
pub fn primal_objective(
    lambda: &[f64],
    b: f64,
    gram: &GramMatrix,
    y: &[f64],
    weights: &WeightVector,
    tau: Tau,
) -> Result<f64> {
    let l = gram.n();
    if weights.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: weights.len(),
            what: "weights",
        });
    }
    let u = margin_residuals(lambda, b, gram, y)?;
    // lambda' Q lambda = s' K s with s = lambda .* y.
    let s: Vec<f64> = lambda.iter().zip(y).map(|(&a, &yi)| a * yi).collect();
    let quad = gram.as_matrix().quad_form(&s);
    let risk: f64 = u
        .iter()
        .enumerate()
        .map(|(i, &ui)| weights.get(i) * pinball(ui, tau))
        .sum();
    Ok(0.5 * quad + risk)
}

impl core::str::FromStr for Tau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s.parse().map_err(|_| Error::param("tau", s.to_string()))?;
        Tau::new(v)
    }
}
