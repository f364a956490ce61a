//! Adaptive double-exponential quadrature on finite and half-infinite ranges.

use quadrature::double_exponential;

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 24;
/// Relative accuracy accepted regardless of `abs_tol`; the rule cannot do much
/// better next to endpoint singularities.
const REL_FLOOR: f64 = 1e-7;

/// `int_a^b f`, bisecting until each piece meets its share of `abs_tol` or
/// the relative floor.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::Domain(format!("integration range [{a}, {b}]")));
    }
    piece(&f, a, b, abs_tol, MAX_DEPTH)
}

fn piece<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let out = double_exponential::integrate(f, a, b, tol);
    if out.integral.is_finite() && out.error_estimate <= tol.max(REL_FLOOR * out.integral.abs()) {
        return Ok(out.integral);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            a,
            b,
            estimate: out.integral,
        });
    }
    let mid = 0.5 * (a + b);
    Ok(piece(f, a, mid, 0.5 * tol, depth - 1)? + piece(f, mid, b, 0.5 * tol, depth - 1)?)
}

/// `int_a^inf f` through the substitution `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64) -> Result<f64> {
    let g = |t: f64| {
        let s = 1.0 - t;
        let v = f(a + t / s) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, abs_tol)
}
