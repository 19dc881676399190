//! Dense projected-gradient reference solver.
//!
//! Spectral (Barzilai-Borwein) projected gradient with a non-monotone
//! line search. The projection onto `{box} \cap {y' x = rhs}` is exact:
//! the multiplier of the hyperplane is bracketed by bisection on a
//! monotone piecewise-linear function and then polished on the final
//! linear piece. Independent of the SMO path by construction; intended as
//! an oracle at moderate problem sizes.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::dual::BoxQP;
use crate::error::Error;
use crate::matrix::dot;
use crate::Result;

use super::{
    check_labels, equality_range, feasibility_slack, kkt_residual_with_gradient, DualSolution,
    SolverConfig,
};

const MAX_DENSE_SIZE: usize = 500;

/// `sum_i y_i clip(v_i - theta y_i)`, non-increasing in `theta`.
fn plane_value(qp: &BoxQP, v: &[f64], theta: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..qp.n() {
        let y = qp.eq_coeffs[i];
        acc += y * (v[i] - theta * y).clamp(qp.lower[i], qp.upper[i]);
    }
    acc
}

/// Exact projection of `v` onto the feasible set.
fn project(qp: &BoxQP, v: &[f64], out: &mut Vec<f64>) {
    // Bracket the hyperplane multiplier.
    let mut radius = 1.0_f64;
    for i in 0..qp.n() {
        radius = radius.max(v[i].abs() + qp.lower[i].abs() + qp.upper[i].abs());
    }
    let mut theta_lo = -2.0 * radius;
    let mut theta_hi = 2.0 * radius;
    // phi is non-increasing: phi(theta_lo) >= rhs >= phi(theta_hi) must
    // bracket; widen if the initial radius was too small.
    for _ in 0..64 {
        if plane_value(qp, v, theta_lo) >= qp.eq_rhs {
            break;
        }
        theta_lo *= 2.0;
    }
    for _ in 0..64 {
        if plane_value(qp, v, theta_hi) <= qp.eq_rhs {
            break;
        }
        theta_hi *= 2.0;
    }

    for _ in 0..128 {
        let mid = 0.5 * (theta_lo + theta_hi);
        if plane_value(qp, v, mid) >= qp.eq_rhs {
            theta_lo = mid;
        } else {
            theta_hi = mid;
        }
        if theta_hi - theta_lo <= 1e-16 * (1.0 + theta_lo.abs()) {
            break;
        }
    }
    let mut theta = 0.5 * (theta_lo + theta_hi);

    // Polish on the identified linear piece: coordinates free at theta
    // satisfy y_i (v_i - theta y_i) summed with the clamped rest = rhs,
    // and y_i^2 = 1.
    let mut free = 0usize;
    let mut free_term = 0.0;
    let mut clamped_term = 0.0;
    for i in 0..qp.n() {
        let y = qp.eq_coeffs[i];
        let raw = v[i] - theta * y;
        if raw <= qp.lower[i] {
            clamped_term += y * qp.lower[i];
        } else if raw >= qp.upper[i] {
            clamped_term += y * qp.upper[i];
        } else {
            free += 1;
            free_term += y * v[i];
        }
    }
    if free > 0 {
        theta = (free_term + clamped_term - qp.eq_rhs) / free as f64;
    }

    out.clear();
    for i in 0..qp.n() {
        let y = qp.eq_coeffs[i];
        out.push((v[i] - theta * y).clamp(qp.lower[i], qp.upper[i]));
    }
}

/// Projected-gradient solve with the same convergence contract as
/// [`super::solve_smo`]: on convergence the maximal KKT violation is at
/// most `cfg.tol`. Limited to dense problems of size `<= 500`.
pub fn solve_reference(qp: &BoxQP, cfg: &SolverConfig) -> Result<DualSolution> {
    cfg.validate()?;
    check_labels(qp)?;
    let n = qp.n();
    if n > MAX_DENSE_SIZE {
        return Err(Error::param(
            "problem size",
            "reference solver is limited to l <= 500",
        ));
    }
    let (reach_lo, reach_hi) = equality_range(qp);
    let slack = feasibility_slack(qp);
    if qp.eq_rhs < reach_lo - slack || qp.eq_rhs > reach_hi + slack {
        return Err(Error::InfeasibleEquality);
    }

    // Start from the projected box midpoint.
    let mid: Vec<f64> = qp
        .lower
        .iter()
        .zip(&qp.upper)
        .map(|(&a, &b)| 0.5 * (a + b))
        .collect();
    let mut x = Vec::with_capacity(n);
    project(qp, &mid, &mut x);

    let mut g = qp.q.matvec(&x);
    for (gi, li) in g.iter_mut().zip(&qp.linear) {
        *gi += li;
    }
    let mut f = qp.objective(&x);

    let mut recent: VecDeque<f64> = VecDeque::with_capacity(10);
    recent.push_back(f);

    let mut step = 1.0;
    let mut trial = Vec::with_capacity(n);
    let mut iterations: u64 = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        if kkt_residual_with_gradient(qp, &x, &g) <= cfg.tol {
            converged = true;
            break;
        }

        let v: Vec<f64> = x.iter().zip(&g).map(|(&xi, &gi)| xi - step * gi).collect();
        project(qp, &v, &mut trial);
        let d: Vec<f64> = trial.iter().zip(&x).map(|(&t, &xi)| t - xi).collect();
        let d_norm = d.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        if d_norm <= 1e-16 {
            // Fixed point of the projected step at this precision.
            break;
        }

        let qd = qp.q.matvec(&d);
        let gd = dot(&g, &d);
        let dqd = dot(&d, &qd);

        // Non-monotone Armijo over the last 10 values; the model
        // f(x + t d) = f + t g'd + t^2/2 d'Qd makes the search exact.
        let f_ref = recent.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let mut t = 1.0;
        let mut f_new = f + gd + 0.5 * dqd;
        for _ in 0..60 {
            if f_new <= f_ref + 1e-4 * t * gd {
                break;
            }
            t *= 0.5;
            f_new = f + t * gd + 0.5 * t * t * dqd;
        }

        for i in 0..n {
            x[i] += t * d[i];
            g[i] += t * qd[i];
        }
        f = f_new;
        recent.push_back(f);
        if recent.len() > 10 {
            recent.pop_front();
        }

        // Barzilai-Borwein step from the accepted move: s = t d, y = t Qd.
        step = if dqd > 0.0 {
            (dot(&d, &d) / dqd).clamp(1e-10, 1e10)
        } else {
            1e10
        };

        iterations += 1;
    }

    let objective = qp.objective(&x);
    let kkt = kkt_residual_with_gradient(qp, &x, &g);
    if kkt <= cfg.tol {
        converged = true;
    }
    Ok(DualSolution {
        lambda: x,
        objective,
        iterations,
        kkt_residual: kkt,
        converged,
    })
}
