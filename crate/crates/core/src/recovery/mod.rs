//! Sparse recovery of compound channel vectors.

mod bpdn;
mod cosamp;

pub use bpdn::{bpdn, operator_norm, BpdnCfg};
pub use cosamp::{cosamp, CosampCfg};

use crate::config::Solver;
use crate::error::Result;
use crate::fft::norm;
use crate::model::Scenario;
use crate::sensing::{restricted_lstsq, LinearOperator};
use crate::C64;

/// One logged solver iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterLog {
    pub iteration: usize,
    pub residual_norm: f64,
    /// Nonzero entries of the iterate.
    pub sparsity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub h_hat: Vec<C64>,
    /// `||h_hat_u||^2` per block of `block_len` entries.
    pub user_energies: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the last accepted update.
    pub d_norm: f64,
    pub rank_deficient: bool,
    pub history: Vec<IterLog>,
}

impl RecoveryResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn finish<O: LinearOperator + ?Sized>(
        op: &O,
        y: &[C64],
        h_hat: Vec<C64>,
        iterations: usize,
        converged: bool,
        d_norm: f64,
        rank_deficient: bool,
        history: Vec<IterLog>,
    ) -> Self {
        let r: Vec<C64> = op.apply_unchecked(&h_hat).iter().zip(y).map(|(a, b)| b - a).collect();
        Self {
            user_energies: block_energies(&h_hat, op.block_len()),
            residual_norm: norm(&r),
            h_hat,
            iterations,
            converged,
            d_norm,
            rank_deficient,
            history,
        }
    }
}

pub fn block_energies(x: &[C64], block_len: usize) -> Vec<f64> {
    x.chunks(block_len.max(1))
        .map(|b| b.iter().map(|v| v.norm_sqr()).sum())
        .collect()
}

/// Indices of the `k` largest values, ties broken towards the lower index,
/// returned in increasing order.
pub fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Least-squares refit of `y` on the `k` largest-magnitude entries of `x`.
pub fn debias<O: LinearOperator + ?Sized>(op: &O, y: &[C64], x: &[C64], k: usize) -> Result<Vec<C64>> {
    let mags: Vec<f64> = x.iter().map(|v| v.norm()).collect();
    let support: Vec<usize> = top_k(&mags, k).into_iter().filter(|&j| mags[j] > 0.0).collect();
    Ok(restricted_lstsq(op, y, &support)?.x)
}

/// Estimates the compound channel from the control window observation.
///
/// BPDN uses the scenario's residual radius, floored at `1e-6 ||y||` so that
/// noiseless problems stay strictly feasible, and is debiased on its `k1 k2`
/// largest entries.
pub fn recover<O: LinearOperator + ?Sized>(
    scenario: &Scenario,
    op: &O,
    y_window: &[C64],
    solver: Solver,
) -> Result<RecoveryResult> {
    let cfg = &scenario.cfg;
    let k = cfg.sparsity();
    match solver {
        Solver::Cosamp => cosamp(op, y_window, k, &CosampCfg::default()),
        Solver::Bpdn => {
            let eps = cfg.bpdn_eps().max(1e-6 * norm(y_window));
            let raw = bpdn(op, y_window, eps, &BpdnCfg::default())?;
            let h = debias(op, y_window, &raw.h_hat, k)?;
            Ok(RecoveryResult::finish(
                op,
                y_window,
                h,
                raw.iterations,
                raw.converged,
                raw.d_norm,
                raw.rank_deficient,
                raw.history,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::DenseOperator;
    use nalgebra::DMatrix;

    #[test]
    fn top_k_prefers_low_index_on_ties() {
        assert_eq!(top_k(&[1.0, 3.0, 3.0, 2.0, 3.0], 2), vec![1, 2]);
        assert_eq!(top_k(&[0.0; 4], 3), vec![0, 1, 2]);
        assert_eq!(top_k(&[5.0, 1.0], 4), vec![0, 1]);
    }

    #[test]
    fn block_energy_sums() {
        let x = [
            C64::new(3.0, 4.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 2.0),
            C64::new(0.0, 0.0),
        ];
        assert_eq!(block_energies(&x, 2), vec![26.0, 4.0]);
    }

    #[test]
    fn debias_removes_shrinkage() {
        let op = DenseOperator::new(DMatrix::identity(4, 4));
        let y = [
            C64::new(2.0, 0.0),
            C64::new(0.1, 0.0),
            C64::new(-3.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        let shrunk = [
            C64::new(1.0, 0.0),
            C64::new(0.05, 0.0),
            C64::new(-2.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        let d = debias(&op, &y, &shrunk, 2).unwrap();
        let expected = [y[0], C64::new(0.0, 0.0), y[2], C64::new(0.0, 0.0)];
        for (a, b) in d.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
