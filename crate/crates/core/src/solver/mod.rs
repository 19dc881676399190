//! Solvers for the canonical box QP with one equality constraint.
//!
//! [`solve_smo`] is the production path: a pair-update method that keeps
//! box and equality feasibility exact at every iteration.
//! [`solve_reference`] is a dense projected-gradient method with an exact
//! projection onto the feasible set; it shares no update code with the SMO
//! path and serves as an independent oracle in tests.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::dual::BoxQP;
use crate::error::Error;
use crate::Result;

mod reference;
mod smo;

pub use reference::solve_reference;
pub use smo::solve_smo;

/// Stopping tolerance, iteration budget, and tie-breaking seed.
///
/// Both solvers are fully deterministic for a fixed seed; selection ties
/// resolve toward the lowest index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Maximal-violating-pair KKT gap at which a solve counts as converged.
    pub tol: f64,
    /// Iteration cap (pair updates for SMO, outer steps for the reference
    /// solver). Exceeding it returns the best iterate with `converged = false`.
    pub max_iter: u64,
    /// Tie-breaking seed recorded with the run.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_iter: 10_000_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::param("tol", self.tol.to_string()));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Solution of a [`BoxQP`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub lambda: Vec<f64>,
    /// Dual objective `1/2 lambda' Q lambda + linear' lambda` at `lambda`.
    pub objective: f64,
    pub iterations: u64,
    pub kkt_residual: f64,
    pub converged: bool,
}

pub(crate) fn check_labels(qp: &BoxQP) -> Result<()> {
    if qp.eq_coeffs.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::param(
            "eq_coeffs",
            "solver requires +/-1 coefficients",
        ));
    }
    Ok(())
}

/// Range of `eq_coeffs' x` reachable inside the box. The equality
/// constraint is feasible iff `eq_rhs` lies inside (checked with a scale-
/// relative slack for accumulated rounding).
pub(crate) fn equality_range(qp: &BoxQP) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for i in 0..qp.n() {
        if qp.eq_coeffs[i] > 0.0 {
            lo += qp.lower[i];
            hi += qp.upper[i];
        } else {
            lo -= qp.upper[i];
            hi -= qp.lower[i];
        }
    }
    (lo, hi)
}

pub(crate) fn feasibility_slack(qp: &BoxQP) -> f64 {
    let scale: f64 = qp
        .lower
        .iter()
        .zip(&qp.upper)
        .map(|(&a, &b)| a.abs() + b.abs())
        .sum();
    1e-10 * (1.0 + scale + qp.eq_rhs.abs())
}

/// Per-coordinate slack below which a coordinate counts as sitting on a
/// bound for KKT accounting.
#[inline]
pub(crate) fn bound_eps(lower: f64, upper: f64) -> f64 {
    1e-10 * (1.0 + lower.abs() + upper.abs())
}

/// Maximum projected-gradient optimality violation of `lambda`.
///
/// The equality multiplier `rho` is estimated by the standard rule: the
/// mean of `-y_i g_i` over free coordinates when any exist, otherwise the
/// midpoint of the bracket formed by the bound coordinates. Coordinates of
/// a degenerate (point) box constrain nothing, so an all-point box reports
/// zero by convention.
pub fn kkt_residual(qp: &BoxQP, lambda: &[f64]) -> f64 {
    let g = {
        let mut g = qp.q.matvec(lambda);
        for (gi, li) in g.iter_mut().zip(&qp.linear) {
            *gi += li;
        }
        g
    };
    kkt_residual_with_gradient(qp, lambda, &g)
}

pub(crate) fn kkt_residual_with_gradient(qp: &BoxQP, lambda: &[f64], g: &[f64]) -> f64 {
    let n = qp.n();
    debug_assert_eq!(lambda.len(), n);

    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut up_max = f64::NEG_INFINITY; // max F_i over coordinates that can move up
    let mut low_min = f64::INFINITY; // min F_i over coordinates that can move down

    let mut in_up = Vec::with_capacity(n);
    let mut in_low = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    for i in 0..n {
        let eps = bound_eps(qp.lower[i], qp.upper[i]);
        let y = qp.eq_coeffs[i];
        let room_above = qp.upper[i] - lambda[i] > eps;
        let room_below = lambda[i] - qp.lower[i] > eps;
        // "up" means increasing y_i lambda_i.
        let up = if y > 0.0 { room_above } else { room_below };
        let low = if y > 0.0 { room_below } else { room_above };
        let f = -y * g[i];
        if up {
            up_max = up_max.max(f);
        }
        if low {
            low_min = low_min.min(f);
        }
        if up && low {
            free_sum += f;
            free_count += 1;
        }
        in_up.push(up);
        in_low.push(low);
        fs.push(f);
    }

    if up_max == f64::NEG_INFINITY && low_min == f64::INFINITY {
        return 0.0;
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else if up_max == f64::NEG_INFINITY {
        low_min
    } else if low_min == f64::INFINITY {
        up_max
    } else {
        0.5 * (up_max + low_min)
    };

    let mut worst = 0.0_f64;
    for i in 0..n {
        if in_up[i] {
            worst = worst.max(fs[i] - rho);
        }
        if in_low[i] {
            worst = worst.max(rho - fs[i]);
        }
    }
    worst
}
