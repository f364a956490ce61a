use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Largest column count accepted by the exhaustive search.
pub const RIP_MAX_COLUMNS: usize = 24;
/// Largest order accepted by the exhaustive search.
pub const RIP_MAX_K: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct RipReport {
    pub k: usize,
    pub delta_k: f64,
    /// Support attaining `delta_k`.
    pub support: Vec<usize>,
    /// Mean column norm the matrix was divided by.
    pub scale: f64,
}

/// Exact restricted isometry constant of order `k` by enumerating every
/// `k`-column submatrix of `a / scale`, where `scale` is the mean column norm.
pub fn rip_constant_exact(a: &DMatrix<C64>, k: usize) -> Result<RipReport> {
    let cols = a.ncols();
    if cols > RIP_MAX_COLUMNS {
        return Err(Error::Limit {
            what: "rip columns",
            got: cols,
            limit: RIP_MAX_COLUMNS,
        });
    }
    if k > RIP_MAX_K {
        return Err(Error::Limit {
            what: "rip order",
            got: k,
            limit: RIP_MAX_K,
        });
    }
    if k == 0 || k > cols {
        return Err(Error::Domain(format!("order {k} outside [1, {cols}]")));
    }
    let scale = a.column_iter().map(|c| c.norm()).sum::<f64>() / cols as f64;
    if scale == 0.0 {
        return Err(Error::Domain("all columns are zero".into()));
    }
    let gram = a.ad_mul(a) / C64::new(scale * scale, 0.0);

    let mut best = RipReport {
        k,
        delta_k: -1.0,
        support: Vec::new(),
        scale,
    };
    for support in (0..cols).combinations(k) {
        let sub = DMatrix::from_fn(k, k, |i, j| gram[(support[i], support[j])]);
        let eig = sub.symmetric_eigen().eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        let delta = (hi - 1.0).max(1.0 - lo);
        if delta > best.delta_k {
            best.delta_k = delta;
            best.support = support;
        }
    }
    Ok(best)
}

/// Number of rows sufficient for order-`k` RIP constant `delta` of a bounded
/// orthonormal system with coherence `mu` over ambient size `n`:
/// `ceil(c' k mu^2 ln(n)^5 / delta^2)`.
pub fn rip_sample_complexity(n: f64, k: usize, delta: f64, mu: f64, c_prime: f64) -> Result<f64> {
    if !(n > 1.0) || !(delta > 0.0 && delta < 1.0) || !(mu > 0.0) || !(c_prime > 0.0) {
        return Err(Error::Domain(format!(
            "n = {n}, delta = {delta}, mu = {mu}, c' = {c_prime}"
        )));
    }
    Ok((c_prime * k as f64 * mu * mu * n.ln().powi(5) / (delta * delta)).ceil())
}
