use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::{inner, norm};
use crate::rng;
use crate::sensing::LinearOperator;
use crate::C64;

use super::{IterLog, RecoveryResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpdnCfg {
    pub max_iter: usize,
    /// Accepted relative violation of `||A x - y|| <= eps`.
    pub feas_tol: f64,
    /// Accepted relative duality gap.
    pub obj_tol: f64,
    /// Iterations between convergence checks.
    pub check_every: usize,
}

impl Default for BpdnCfg {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            feas_tol: 1e-3,
            obj_tol: 1e-3,
            check_every: 10,
        }
    }
}

/// Spectral norm estimate from power iteration on `A* A`.
pub fn operator_norm<O: LinearOperator + ?Sized>(op: &O, iters: usize) -> f64 {
    let mut r = rng::stream(0, rng::Domain::Aux, u64::MAX);
    let mut v: Vec<C64> = (0..op.cols())
        .map(|_| C64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)))
        .collect();
    let mut est = 0.0;
    for _ in 0..iters {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        v = op.adjoint_unchecked(&op.apply_unchecked(&v));
        est = norm(&v).sqrt();
    }
    est
}

fn soft(v: C64, t: f64) -> C64 {
    let a = v.norm();
    if a <= t {
        C64::new(0.0, 0.0)
    } else {
        v * (1.0 - t / a)
    }
}

/// Lower bound on the optimum from a dual point `z`, rescaled into
/// `||A* z||_inf <= 1`: `-Re<z, y> - eps ||z||`.
fn dual_value<O: LinearOperator + ?Sized>(op: &O, y: &[C64], eps: f64, z: &[C64]) -> f64 {
    let s = op
        .adjoint_unchecked(z)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()))
        .max(1.0);
    (-inner(z, y).re - eps * norm(z)) / s
}

/// Basis pursuit denoising, `min ||x||_1` subject to `||A x - y|| <= eps`,
/// by primal-dual hybrid gradient iterations.
///
/// Converged means the iterate is feasible within `feas_tol` and the duality
/// gap is within `obj_tol` of the objective.
pub fn bpdn<O: LinearOperator + ?Sized>(op: &O, y: &[C64], eps: f64, cfg: &BpdnCfg) -> Result<RecoveryResult> {
    if y.len() != op.rows() {
        return Err(Error::Dimension {
            expected: op.rows(),
            got: y.len(),
        });
    }
    if !(eps >= 0.0) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let cols = op.cols();
    let y_norm = norm(y);
    let zero = C64::new(0.0, 0.0);
    if eps >= y_norm {
        return Ok(RecoveryResult::finish(
            op,
            y,
            vec![zero; cols],
            0,
            true,
            0.0,
            false,
            Vec::new(),
        ));
    }
    let l = operator_norm(op, 60) * 1.01;
    if l == 0.0 {
        return Ok(RecoveryResult::finish(
            op,
            y,
            vec![zero; cols],
            0,
            false,
            0.0,
            true,
            Vec::new(),
        ));
    }
    // Step sizes keep tau sigma ||A||^2 < 1 and are rebalanced between the
    // primal and dual residuals.
    let mut tau = 0.99 / l;
    let mut sigma = 0.99 / l;
    let mut adapt = 0.5;
    let feas_limit = eps * (1.0 + cfg.feas_tol) + 1e-12 * y_norm;

    let mut x = vec![zero; cols];
    let mut ax = vec![zero; y.len()];
    let mut z = vec![zero; y.len()];
    let mut atz = vec![zero; cols];
    let mut history = Vec::new();
    let mut converged = false;
    let mut d_norm = 0.0;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        // Primal step: complex soft threshold.
        let x_new: Vec<C64> = x.iter().zip(&atz).map(|(xi, gi)| soft(*xi - tau * gi, tau)).collect();
        let ax_new = op.apply_unchecked(&x_new);
        // Dual step: v - sigma Proj_ball(v / sigma), v = z + sigma A (2 x_new - x).
        let mut z_new: Vec<C64> = z
            .iter()
            .zip(ax_new.iter().zip(&ax))
            .map(|(zi, (a1, a0))| zi + sigma * (a1 * 2.0 - a0))
            .collect();
        let dev: Vec<C64> = z_new.iter().zip(y).map(|(v, yi)| v / sigma - yi).collect();
        let dn = norm(&dev);
        let shrink = if dn > eps { eps / dn } else { 1.0 };
        for ((zi, di), yi) in z_new.iter_mut().zip(&dev).zip(y) {
            *zi -= sigma * (yi + di * shrink);
        }
        let atz_new = op.adjoint_unchecked(&z_new);

        let p_res: f64 = x
            .iter()
            .zip(&x_new)
            .zip(atz.iter().zip(&atz_new))
            .map(|((a, b), (c, d))| ((a - b) / tau - (c - d)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let d_res: f64 = z
            .iter()
            .zip(&z_new)
            .zip(ax.iter().zip(&ax_new))
            .map(|((a, b), (c, d))| ((a - b) / sigma - (c - d)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        d_norm = x
            .iter()
            .zip(&x_new)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if p_res > 1.5 * d_res {
            tau /= 1.0 - adapt;
            sigma *= 1.0 - adapt;
            adapt *= 0.95;
        } else if p_res < d_res / 1.5 {
            tau *= 1.0 - adapt;
            sigma /= 1.0 - adapt;
            adapt *= 0.95;
        }
        x = x_new;
        ax = ax_new;
        z = z_new;
        atz = atz_new;

        if iterations % cfg.check_every == 0 {
            let r_norm = ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            history.push(IterLog {
                iteration: iterations,
                residual_norm: r_norm,
                sparsity: x.iter().filter(|v| v.norm_sqr() > 0.0).count(),
            });
            if r_norm <= feas_limit {
                let primal: f64 = x.iter().map(|v| v.norm()).sum();
                let dual = dual_value(op, y, eps, &z);
                if primal - dual <= cfg.obj_tol * primal.max(f64::MIN_POSITIVE) {
                    converged = true;
                    break;
                }
            }
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(RecoveryResult::finish(
        op, y, x, iterations, converged, d_norm, false, history,
    ))
}
