//! Damped least squares with finite-difference Jacobians, and a
//! derivative-free simplex fallback for rank-deficient problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Initial damping factor; x10 on rejected steps, /10 on accepted ones.
    pub initial_damping: f64,
    /// Relative cost decrease below which an accepted step counts as flat.
    pub cost_tol: f64,
    /// Infinity norm of the gradient below which the fit has converged.
    pub grad_tol: f64,
    /// Number of successive flat accepted steps that signal convergence.
    pub flat_streak: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            initial_damping: 1e-3,
            cost_tol: 1e-10,
            grad_tol: 1e-12,
            flat_streak: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// True when the damped normal equations degenerated and the simplex
    /// fallback produced the result.
    pub used_fallback: bool,
}

pub(crate) fn sum_of_squares(residuals: &[f64]) -> f64 {
    residuals.iter().map(|r| r * r).sum()
}

/// Forward-difference Jacobian of the residual vector. Frozen coordinates
/// get an all-zero column.
fn jacobian<R>(residuals: &R, x: &[f64], r0: &[f64], frozen: &[bool]) -> Result<DMatrix<f64>>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        if frozen[j] {
            continue;
        }
        let h = f64::EPSILON.sqrt() * x[j].abs().max(1e-8);
        probe[j] = x[j] + h;
        let r1 = residuals(&probe)?;
        probe[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (r1[i] - r0[i]) / h;
        }
    }
    Ok(jac)
}

/// Minimise |residuals(x)|^2 by damped least squares.
///
/// `frozen` is re-evaluated at the current point on every iteration; frozen
/// coordinates are held fixed for that step (used to pin gauge-degenerate
/// parameters). Falls back to the simplex search when the damped normal
/// equations stay degenerate.
pub fn least_squares<R, F>(
    residuals: R,
    x0: &[f64],
    frozen_at: F,
    opts: &LmOptions,
) -> Result<LmReport>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
    F: Fn(&[f64]) -> Vec<bool>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residuals(&x)?;
    let mut cost = sum_of_squares(&r);
    if !cost.is_finite() {
        return Err(Error::Numerics("initial residuals are not finite".into()));
    }
    if n == 0 {
        return Ok(LmReport {
            x,
            cost,
            iterations: 0,
            converged: true,
            used_fallback: false,
        });
    }

    let mut lambda = opts.initial_damping;
    let mut flat_count = 0usize;
    let mut degenerate_count = 0usize;

    for iteration in 1..=opts.max_iterations {
        let frozen = frozen_at(&x);
        let jac = jacobian(&residuals, &x, &r, &frozen)?;
        let r_vec = DVector::from_column_slice(&r);
        let gradient = jac.transpose() * &r_vec;
        if gradient.amax() < opts.grad_tol {
            return Ok(LmReport {
                x,
                cost,
                iterations: iteration,
                converged: true,
                used_fallback: false,
            });
        }
        let normal = jac.transpose() * &jac;

        // Damped step; escalate the damping until a step is accepted or
        // the system proves degenerate.
        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = normal.clone();
            for j in 0..n {
                // Marquardt scaling keeps the step invariant under uniform
                // reweighting of the residuals.
                let d = normal[(j, j)];
                damped[(j, j)] = d + lambda * d.max(1e-30);
            }
            let step = damped.lu().solve(&(-&gradient));
            let step = match step {
                Some(s) if s.iter().all(|v| v.is_finite()) => s,
                _ => {
                    lambda *= 10.0;
                    if lambda > 1e12 {
                        degenerate_count += 1;
                        break;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + si).collect();
            let trial_r = match residuals(&trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda *= 10.0;
                    if lambda > 1e12 {
                        degenerate_count += 1;
                        break;
                    }
                    continue;
                }
            };
            let trial_cost = sum_of_squares(&trial_r);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel_drop = (cost - trial_cost) / cost.max(1e-300);
                x = trial;
                r = trial_r;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-14);
                accepted = true;
                degenerate_count = 0;
                flat_count = if rel_drop < opts.cost_tol {
                    flat_count + 1
                } else {
                    0
                };
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }

        if degenerate_count >= 2 {
            return simplex_fallback(&residuals, &x, cost, iteration, opts);
        }
        if accepted {
            if flat_count >= opts.flat_streak {
                return Ok(LmReport {
                    x,
                    cost,
                    iterations: iteration,
                    converged: true,
                    used_fallback: false,
                });
            }
        } else {
            // Damping saturated without progress: either we are at a
            // minimum (small gradient) or the surface is degenerate.
            let frozen = frozen_at(&x);
            let jac = jacobian(&residuals, &x, &r, &frozen)?;
            let gradient = jac.transpose() * DVector::from_column_slice(&r);
            if gradient.amax() < opts.grad_tol.max(1e-8 * cost.max(1e-300)) {
                return Ok(LmReport {
                    x,
                    cost,
                    iterations: iteration,
                    converged: true,
                    used_fallback: false,
                });
            }
            return simplex_fallback(&residuals, &x, cost, iteration, opts);
        }
    }

    Ok(LmReport {
        x,
        cost,
        iterations: opts.max_iterations,
        converged: false,
        used_fallback: false,
    })
}

fn simplex_fallback<R>(
    residuals: &R,
    x: &[f64],
    cost: f64,
    iterations_used: usize,
    opts: &LmOptions,
) -> Result<LmReport>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let objective = |p: &[f64]| -> Result<f64> { Ok(sum_of_squares(&residuals(p)?)) };
    let budget = opts.max_iterations.saturating_sub(iterations_used).max(50);
    let (best, best_cost, evals, converged) = nelder_mead(&objective, x, budget * 10)?;
    let improved = best_cost < cost;
    Ok(LmReport {
        x: if improved { best } else { x.to_vec() },
        cost: if improved { best_cost } else { cost },
        iterations: iterations_used + evals,
        converged,
        used_fallback: true,
    })
}

/// Nelder-Mead simplex descent. Returns (best point, best cost, number of
/// iterations, whether the spread tolerance was reached).
pub fn nelder_mead<F>(
    objective: &F,
    x0: &[f64],
    max_iterations: usize,
) -> Result<(Vec<f64>, f64, usize, bool)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    const SPREAD_TOL: f64 = 1e-14;

    let n = x0.len();
    if n == 0 {
        return Ok((x0.to_vec(), objective(x0)?, 0, true));
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for j in 0..n {
        let mut v = x0.to_vec();
        let step = 0.1 * v[j].abs().max(0.1);
        v[j] += step;
        simplex.push(v);
    }
    let mut costs: Vec<f64> = simplex
        .iter()
        .map(|v| objective(v))
        .collect::<Result<_>>()?;

    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        let best = order[0];
        let worst = order[n];
        let spread = costs[worst] - costs[best];
        if spread.abs() <= SPREAD_TOL * (1.0 + costs[best].abs()) {
            return Ok((simplex[best].clone(), costs[best], iterations, true));
        }

        let mut centroid = vec![0.0; n];
        for &idx in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(simplex[idx].iter()) {
                *c += v / n as f64;
            }
        }

        let blend = |a: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from.iter())
                .map(|(c, w)| c + a * (c - w))
                .collect()
        };

        let reflected = blend(ALPHA, &simplex[worst]);
        let reflected_cost = objective(&reflected).unwrap_or(f64::INFINITY);
        if reflected_cost < costs[best] {
            let expanded = blend(GAMMA, &simplex[worst]);
            let expanded_cost = objective(&expanded).unwrap_or(f64::INFINITY);
            if expanded_cost < reflected_cost {
                simplex[worst] = expanded;
                costs[worst] = expanded_cost;
            } else {
                simplex[worst] = reflected;
                costs[worst] = reflected_cost;
            }
            continue;
        }
        if reflected_cost < costs[order[n - 1]] {
            simplex[worst] = reflected;
            costs[worst] = reflected_cost;
            continue;
        }
        let contracted = blend(-RHO, &simplex[worst]);
        let contracted_cost = objective(&contracted).unwrap_or(f64::INFINITY);
        if contracted_cost < costs[worst] {
            simplex[worst] = contracted;
            costs[worst] = contracted_cost;
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[best].clone();
        for idx in 0..=n {
            if idx == best {
                continue;
            }
            for (v, a) in simplex[idx].iter_mut().zip(anchor.iter()) {
                *v = a + SIGMA * (*v - a);
            }
            costs[idx] = objective(&simplex[idx]).unwrap_or(f64::INFINITY);
        }
    }

    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
    Ok((
        simplex[order[0]].clone(),
        costs[order[0]],
        iterations,
        false,
    ))
}
