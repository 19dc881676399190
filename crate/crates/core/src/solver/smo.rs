//! Pair-update (SMO-style) solver for the canonical box QP.

use alloc::vec::Vec;

use crate::dual::BoxQP;
use crate::error::Error;
use crate::Result;

use super::{
    check_labels, equality_range, feasibility_slack, kkt_residual_with_gradient, DualSolution,
    SolverConfig,
};

/// Builds a feasible start: the box's lower corner, with the equality
/// constraint repaired by raising coordinates of the needed label sign as
/// far as their upper bounds allow.
fn initial_feasible_point(qp: &BoxQP) -> Result<Vec<f64>> {
    let (reach_lo, reach_hi) = equality_range(qp);
    let slack = feasibility_slack(qp);
    if qp.eq_rhs < reach_lo - slack || qp.eq_rhs > reach_hi + slack {
        return Err(Error::InfeasibleEquality);
    }

    let mut x = qp.lower.clone();
    let mut deficit = qp.eq_rhs;
    for i in 0..qp.n() {
        deficit -= qp.eq_coeffs[i] * x[i];
    }
    // deficit > 0 wants more weight on +1 coordinates, deficit < 0 on -1.
    for i in 0..qp.n() {
        if deficit.abs() <= slack {
            break;
        }
        let y = qp.eq_coeffs[i];
        if y * deficit <= 0.0 {
            continue;
        }
        let room = qp.upper[i] - x[i];
        let step = room.min(deficit.abs());
        x[i] += step;
        deficit -= y * step;
    }
    if deficit.abs() > slack {
        return Err(Error::InfeasibleEquality);
    }
    Ok(x)
}

/// Maximal violating pair on the gradient. Returns `(i, j, gap)` where `i`
/// maximizes `-y g` over coordinates with room upward in `y`-direction and
/// `j` minimizes it over coordinates with room downward. Ties resolve to
/// the lowest index.
fn select_pair(qp: &BoxQP, x: &[f64], g: &[f64]) -> Option<(usize, usize, f64)> {
    let mut best_up: Option<(usize, f64)> = None;
    let mut best_low: Option<(usize, f64)> = None;
    for i in 0..qp.n() {
        let y = qp.eq_coeffs[i];
        let room_above = x[i] < qp.upper[i];
        let room_below = x[i] > qp.lower[i];
        let up = if y > 0.0 { room_above } else { room_below };
        let low = if y > 0.0 { room_below } else { room_above };
        let f = -y * g[i];
        if up && best_up.is_none_or(|(_, v)| f > v) {
            best_up = Some((i, f));
        }
        if low && best_low.is_none_or(|(_, v)| f < v) {
            best_low = Some((i, f));
        }
    }
    match (best_up, best_low) {
        (Some((i, m)), Some((j, mm))) if i != j => Some((i, j, m - mm)),
        _ => None,
    }
}

/// Solves the box QP by maximal-violating-pair updates with exact 1-D
/// minimization clipped to the box. Box and equality feasibility hold at
/// every iterate; the objective never increases. Deterministic for a fixed
/// [`SolverConfig`].
pub fn solve_smo(qp: &BoxQP, cfg: &SolverConfig) -> Result<DualSolution> {
    cfg.validate()?;
    check_labels(qp)?;
    let n = qp.n();
    let mut x = initial_feasible_point(qp)?;

    let mut g: Vec<f64> = qp.q.matvec(&x);
    for (gi, li) in g.iter_mut().zip(&qp.linear) {
        *gi += li;
    }

    let mut iterations: u64 = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let Some((i, j, gap)) = select_pair(qp, &x, &g) else {
            converged = true;
            break;
        };
        if gap <= cfg.tol {
            converged = true;
            break;
        }

        let yi = qp.eq_coeffs[i];
        let yj = qp.eq_coeffs[j];
        // Move along d = y_i e_i - y_j e_j, which preserves the equality
        // constraint. Curvature along d:
        let eta = qp.q.get(i, i) + qp.q.get(j, j) - 2.0 * yi * yj * qp.q.get(i, j);
        let slope = yi * g[i] - yj * g[j]; // equals -gap < 0

        // Step caps from the two coordinates' bounds.
        let cap_i = if yi > 0.0 {
            qp.upper[i] - x[i]
        } else {
            x[i] - qp.lower[i]
        };
        let cap_j = if yj > 0.0 {
            x[j] - qp.lower[j]
        } else {
            qp.upper[j] - x[j]
        };
        let t_max = cap_i.min(cap_j);

        // Zero-curvature sub-problems slide to the cap; the slope is
        // strictly negative for a violating pair.
        let t = if eta > 0.0 {
            (-slope / eta).min(t_max)
        } else {
            t_max
        };

        let (new_i, new_j);
        if t < t_max {
            new_i = x[i] + yi * t;
            new_j = x[j] - yj * t;
        } else {
            // Land exactly on the binding bound and recover the partner
            // from the conserved sum y_i x_i + y_j x_j.
            let conserved = yi * x[i] + yj * x[j];
            if cap_i <= cap_j {
                let bi = if yi > 0.0 { qp.upper[i] } else { qp.lower[i] };
                new_i = bi;
                new_j = (yj * (conserved - yi * bi)).clamp(qp.lower[j], qp.upper[j]);
            } else {
                let bj = if yj > 0.0 { qp.lower[j] } else { qp.upper[j] };
                new_j = bj;
                new_i = (yi * (conserved - yj * bj)).clamp(qp.lower[i], qp.upper[i]);
            }
        }

        let di = new_i - x[i];
        let dj = new_j - x[j];
        if di == 0.0 && dj == 0.0 {
            // No representable progress left at this precision.
            break;
        }

        #[cfg(debug_assertions)]
        {
            let delta_f = g[i] * di
                + g[j] * dj
                + 0.5
                    * (qp.q.get(i, i) * di * di
                        + 2.0 * qp.q.get(i, j) * di * dj
                        + qp.q.get(j, j) * dj * dj);
            debug_assert!(
                delta_f <= 1e-9 * (1.0 + g[i].abs() + g[j].abs()),
                "pair update increased the objective"
            );
        }

        x[i] = new_i;
        x[j] = new_j;
        for k in 0..n {
            g[k] += qp.q.get(k, i) * di + qp.q.get(k, j) * dj;
        }
        iterations += 1;
    }

    let objective = qp.objective(&x);
    let kkt = kkt_residual_with_gradient(qp, &x, &g);
    Ok(DualSolution {
        lambda: x,
        objective,
        iterations,
        kkt_residual: kkt,
        converged,
    })
}
