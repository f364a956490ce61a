use crate::error::{Error, Result};
use crate::fft::norm;
use crate::sensing::{restricted_lstsq, LinearOperator};
use crate::C64;

use super::{top_k, IterLog, RecoveryResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosampCfg {
    pub max_iter: usize,
    /// Stop once `||r|| <= tol ||y||`.
    pub tol: f64,
    /// Stop once `||x_new - x|| <= stall ||x_new||`.
    pub stall: f64,
}

impl Default for CosampCfg {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-9,
            stall: 1e-6,
        }
    }
}

/// CoSaMP for a `k`-sparse solution of `y = A x`.
///
/// Iterates run unmodified; the result is the iterate with the smallest
/// residual, and `history` logs that running minimum.
pub fn cosamp<O: LinearOperator + ?Sized>(op: &O, y: &[C64], k: usize, cfg: &CosampCfg) -> Result<RecoveryResult> {
    if y.len() != op.rows() {
        return Err(Error::Dimension {
            expected: op.rows(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let cols = op.cols();
    let k = k.min(cols);
    let mut x = vec![C64::new(0.0, 0.0); cols];
    let mut support: Vec<usize> = Vec::new();
    let mut r = y.to_vec();
    let y_norm = norm(y);
    let mut r_norm = y_norm;
    let mut best = (x.clone(), y_norm);
    let mut history = Vec::new();
    let mut rank_deficient = false;
    let mut d_norm = 0.0;
    let mut converged = y_norm == 0.0 || k == 0;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let proxy: Vec<f64> = op.adjoint_unchecked(&r).iter().map(|v| v.norm()).collect();
        let mut merged = top_k(&proxy, (2 * k).min(cols));
        merged.extend_from_slice(&support);
        merged.sort_unstable();
        merged.dedup();
        merged.truncate(op.rows());

        let fit = restricted_lstsq(op, y, &merged)?;
        rank_deficient |= fit.rank_deficient;
        let mags: Vec<f64> = fit.x.iter().map(|v| v.norm()).collect();
        let new_support = top_k(&mags, k);
        let mut x_new = vec![C64::new(0.0, 0.0); cols];
        for &j in &new_support {
            x_new[j] = fit.x[j];
        }
        let ax = op.apply_unchecked(&x_new);
        let r_new: Vec<C64> = y.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let r_new_norm = norm(&r_new);

        d_norm = x_new
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let stalled = (r_norm - r_new_norm).abs() <= cfg.stall * r_norm.max(f64::MIN_POSITIVE)
            || d_norm <= cfg.stall * norm(&x_new);
        if r_new_norm < best.1 {
            best = (x_new.clone(), r_new_norm);
        }
        history.push(IterLog {
            iteration: iterations,
            residual_norm: best.1,
            sparsity: best.0.iter().filter(|v| v.norm_sqr() > 0.0).count(),
        });
        x = x_new;
        support = new_support;
        r = r_new;
        r_norm = r_new_norm;
        if best.1 <= cfg.tol * y_norm || stalled {
            converged = true;
        }
    }
    let x = best.0;
    Ok(RecoveryResult::finish(
        op,
        y,
        x,
        iterations,
        converged,
        d_norm,
        rank_deficient,
        history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sensing::DenseOperator;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian<R: Rng>(rows: usize, cols: usize, r: &mut R) -> DenseOperator {
        let s = (2.0 * rows as f64).sqrt().recip();
        DenseOperator::new(DMatrix::from_fn(rows, cols, |_, _| {
            C64::new(StandardNormal.sample(r), StandardNormal.sample(r)) * s
        }))
    }

    fn sparse<R: Rng>(cols: usize, k: usize, r: &mut R) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); cols];
        for j in rand::seq::index::sample(r, cols, k) {
            x[j] = C64::from_polar(1.0 + r.random::<f64>(), r.random::<f64>() * 6.3);
        }
        x
    }

    #[test]
    fn zero_measurement_gives_zero() {
        let mut r = rng::stream(1, rng::Domain::Aux, 0);
        let op = gaussian(10, 20, &mut r);
        let out = cosamp(&op, &[C64::new(0.0, 0.0); 10], 3, &CosampCfg::default()).unwrap();
        assert!(out.h_hat.iter().all(|v| v.norm() == 0.0));
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn exact_recovery_on_gaussian_ensemble() {
        let mut r = rng::stream(2, rng::Domain::Aux, 0);
        let mut ok = 0;
        for _ in 0..100 {
            let op = gaussian(40, 120, &mut r);
            let x = sparse(120, 5, &mut r);
            let y = op.apply(&x).unwrap();
            let out = cosamp(&op, &y, 5, &CosampCfg::default()).unwrap();
            let err: f64 = out.h_hat.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum();
            if err.sqrt() <= 1e-6 * norm(&x) {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}/100");
    }

    #[test]
    fn residual_history_is_monotone() {
        let mut r = rng::stream(3, rng::Domain::Aux, 0);
        for _ in 0..20 {
            let op = gaussian(20, 60, &mut r);
            let mut y = op.apply(&sparse(60, 6, &mut r)).unwrap();
            for v in y.iter_mut() {
                *v += C64::new(StandardNormal.sample(&mut r), 0.0) * 0.1;
            }
            let out = cosamp(&op, &y, 6, &CosampCfg::default()).unwrap();
            let mut prev = norm(&y);
            for h in &out.history {
                assert!(h.residual_norm <= prev + 1e-9);
                assert!(h.sparsity <= 6);
                prev = h.residual_norm;
            }
            assert!(out.h_hat.iter().filter(|v| v.norm() > 0.0).count() <= 6);
            assert!((out.residual_norm - out.history.last().map_or(norm(&y), |h| h.residual_norm)).abs() < 1e-9);
        }
    }

    #[test]
    fn dimension_and_finiteness_checks() {
        let op = DenseOperator::identity(4);
        assert!(cosamp(&op, &[C64::new(0.0, 0.0); 3], 1, &CosampCfg::default()).is_err());
        let y = [C64::new(f64::NAN, 0.0); 4];
        assert!(matches!(
            cosamp(&op, &y, 1, &CosampCfg::default()),
            Err(Error::NonFinite)
        ));
    }
}
