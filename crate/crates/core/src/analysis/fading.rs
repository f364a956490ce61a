use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::config::{SystemConfig, TapLaw};
use crate::error::{Error, Result};

use super::quad::{integrate, integrate_to_infinity};

/// Law of the per-user channel norm `x = ||h||`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormLaw {
    /// `x^2 ~ Gamma(shape, rate = shape)`, unit mean, as for `shape` taps of
    /// variance `1/shape`.
    Gamma {
        shape: u32,
    },
    PointMass {
        x0: f64,
    },
}

/// Law of the per-subcarrier channel power `|g(f)|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PowerLaw {
    Exponential,
    PointMass { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingModel {
    pub norm: NormLaw,
    pub power: PowerLaw,
    /// Absolute tolerance of every quadrature.
    pub abs_tol: f64,
}

impl FadingModel {
    pub fn rayleigh(taps: u32) -> Self {
        Self {
            norm: NormLaw::Gamma { shape: taps },
            power: PowerLaw::Exponential,
            abs_tol: 1e-10,
        }
    }

    pub fn deterministic(x0: f64, p: f64) -> Self {
        Self {
            norm: NormLaw::PointMass { x0 },
            power: PowerLaw::PointMass { p },
            abs_tol: 1e-10,
        }
    }

    /// Fading laws implied by the tap statistics of `cfg`.
    ///
    /// Unit-modulus taps fix the norm at 1; the per-subcarrier power is then
    /// deterministic only for a single tap.
    pub fn for_config(cfg: &SystemConfig) -> Self {
        match cfg.tap_law {
            TapLaw::Gaussian => Self::rayleigh(cfg.k1.max(1) as u32),
            TapLaw::UnitModulus if cfg.k1 == 1 => Self::deterministic(1.0, 1.0),
            TapLaw::UnitModulus => Self {
                norm: NormLaw::PointMass { x0: 1.0 },
                power: PowerLaw::Exponential,
                abs_tol: 1e-10,
            },
        }
    }

    /// `F(x) = P(||h|| <= x)`.
    pub fn norm_cdf(&self, x: f64) -> f64 {
        match self.norm {
            NormLaw::Gamma { shape } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let k = shape as f64;
                let g = k * x * x;
                let mut term = 1.0;
                let mut sum = 1.0;
                for j in 1..shape {
                    term *= g / j as f64;
                    sum += term;
                }
                (1.0 - (-g).exp() * sum).clamp(0.0, 1.0)
            }
            NormLaw::PointMass { x0 } => (x >= x0) as u8 as f64,
        }
    }

    /// Density of `||h||`; `None` for a point mass.
    pub fn norm_pdf(&self, x: f64) -> Option<f64> {
        match self.norm {
            NormLaw::Gamma { shape } => {
                if x <= 0.0 {
                    return Some(0.0);
                }
                // f_x(x) = 2x g(x^2), g the Gamma(k, k) density.
                let k = shape as f64;
                let g = x * x;
                let log_fact: f64 = (1..shape).map(|j| (j as f64).ln()).sum();
                let log_g = k * k.ln() + (k - 1.0) * g.ln() - k * g - log_fact;
                Some(2.0 * x * log_g.exp())
            }
            NormLaw::PointMass { .. } => None,
        }
    }

    /// `E f(|g|^2)` over the per-subcarrier power law.
    pub fn expect_power<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        match self.power {
            PowerLaw::Exponential => integrate_to_infinity(|z| f(z) * (-z).exp(), 0.0, self.abs_tol),
            PowerLaw::PointMass { p } => Ok(f(p)),
        }
    }

    /// Integrates the density of the probability mass of `||h||` in
    /// `(lo, inf)` against `w`.
    pub fn expect_norm_above<F: Fn(f64) -> f64>(&self, lo: f64, w: F) -> Result<f64> {
        match self.norm {
            NormLaw::PointMass { x0 } => Ok(if x0 > lo { w(x0) } else { 0.0 }),
            NormLaw::Gamma { .. } => {
                let lo = lo.max(0.0);
                let density = |x: f64| self.norm_pdf(x).unwrap_or(0.0) * w(x);
                // Resolve the neighbourhood of the lower limit on its own.
                let near = integrate(density, lo, lo + 1.0, self.abs_tol)?;
                Ok(near + integrate_to_infinity(density, lo + 1.0, self.abs_tol)?)
            }
        }
    }

    pub fn sample_norm<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match self.norm {
            NormLaw::Gamma { shape } => {
                let k = shape as f64;
                let g = Gamma::new(k, 1.0 / k).map_err(|e| Error::Domain(e.to_string()))?;
                Ok(g.sample(rng).sqrt())
            }
            NormLaw::PointMass { x0 } => Ok(x0),
        }
    }

    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.power {
            PowerLaw::Exponential => Exp1.sample(rng),
            PowerLaw::PointMass { p } => p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn densities_integrate_to_one() {
        for shape in [1, 2, 4, 6] {
            let f = FadingModel::rayleigh(shape);
            let mass = f.expect_norm_above(0.0, |_| 1.0).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "{shape}: {mass}");
            assert!((f.expect_power(|_| 1.0).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn cdf_matches_density() {
        let f = FadingModel::rayleigh(4);
        for x in [0.3, 0.8, 1.0, 1.7] {
            let direct = integrate(|t| f.norm_pdf(t).unwrap(), 0.0, x, 1e-12).unwrap();
            assert!((direct - f.norm_cdf(x)).abs() < 1e-9);
        }
        // single tap: x^2 ~ Exp(1)
        let f = FadingModel::rayleigh(1);
        assert!((f.norm_cdf(0.5) - (1.0 - (-0.25f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn cdf_matches_sampling() {
        let f = FadingModel::rayleigh(4);
        let mut r = rng::stream(4, rng::Domain::Aux, 0);
        let n = 100_000;
        let below = (0..n).filter(|_| f.sample_norm(&mut r).unwrap() <= 0.9).count();
        let p = f.norm_cdf(0.9);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((below as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn point_masses() {
        let f = FadingModel::deterministic(1.2, 0.7);
        assert_eq!(f.norm_cdf(1.1), 0.0);
        assert_eq!(f.norm_cdf(1.2), 1.0);
        assert_eq!(f.expect_power(|p| p * 2.0).unwrap(), 1.4);
        assert_eq!(f.expect_norm_above(1.0, |x| x).unwrap(), 1.2);
        assert_eq!(f.expect_norm_above(1.2, |x| x).unwrap(), 0.0);
    }
}
