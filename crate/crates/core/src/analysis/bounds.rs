use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::rng;

use super::fading::{FadingModel, NormLaw};

/// `c1(delta) = 4 sqrt(1 + delta) / (1 - (1 + sqrt 2) delta)`, the BPDN
/// error constant for `2k`-RIP constant `delta < sqrt(2) - 1`.
pub fn c1_of_delta(delta: f64) -> Result<f64> {
    let den = 1.0 - (1.0 + SQRT_2) * delta;
    if !(delta >= 0.0) || den <= 0.0 {
        return Err(Error::Domain(format!("delta = {delta} outside [0, sqrt(2) - 1)")));
    }
    Ok(4.0 * (1.0 + delta).sqrt() / den)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CrValue {
    Finite(f64),
    Divergent,
}

impl CrValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            CrValue::Finite(v) => Some(v),
            CrValue::Divergent => None,
        }
    }
}

/// `c_r(xi) = int_{xi + cutoff}^inf dF(x) / (x - xi)^2` over the law of the
/// channel norm.
///
/// With `cutoff = 0` the integral is probed at geometrically shrinking
/// cutoffs; growth that does not settle reports [`CrValue::Divergent`].
pub fn c_r(xi: f64, fading: &FadingModel, cutoff: f64) -> Result<CrValue> {
    if !(xi >= 0.0) || !(cutoff >= 0.0) {
        return Err(Error::Domain(format!("xi = {xi}, cutoff = {cutoff}")));
    }
    let at = |c: f64| fading.expect_norm_above(xi + c, |x| (x - xi).powi(-2));
    if let NormLaw::PointMass { .. } = fading.norm {
        return Ok(CrValue::Finite(at(cutoff)?));
    }
    if cutoff > 0.0 {
        return Ok(CrValue::Finite(at(cutoff)?));
    }
    let mut c = 1.0 / 16.0;
    let mut prev = at(c)?;
    let mut prev_inc = f64::NAN;
    for _ in 0..12 {
        c *= 0.5;
        let cur = at(c)?;
        let inc = cur - prev;
        if prev_inc.is_finite() && prev_inc > 0.0 {
            let ratio = inc / prev_inc;
            if ratio > 0.75 {
                return Ok(CrValue::Divergent);
            }
            if inc <= 1e-12 * cur.abs().max(1.0) {
                return Ok(CrValue::Finite(cur));
            }
        }
        prev = cur;
        prev_inc = inc;
    }
    // Geometric tail of the remaining increments.
    Ok(CrValue::Finite(prev + prev_inc.max(0.0)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PfaVariant {
    /// `c1^2 m / (alpha xi sigma^2)`.
    AsPrinted,
    /// `c1^2 m sigma^2 / (alpha xi)`, the Markov bound on the estimation
    /// error energy.
    #[default]
    DerivationConsistent,
}

impl std::fmt::Display for PfaVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PfaVariant::AsPrinted => "as_printed",
            PfaVariant::DerivationConsistent => "derivation_consistent",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub delta_2k: f64,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub sigma2: f64,
    pub k2: usize,
    /// Energy threshold on `||h_hat_u||^2`; the norm-domain terms are
    /// evaluated at `sqrt(xi_thr)`.
    pub xi_thr: f64,
    pub pfa_variant: PfaVariant,
}

impl BoundInputs {
    fn check(&self) -> Result<f64> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha = {} outside (0, 1]", self.alpha)));
        }
        if !(self.sigma2 >= 0.0) || !(self.xi_thr >= 0.0) || self.m == 0 || self.n == 0 {
            return Err(Error::Domain("invalid bound inputs".into()));
        }
        c1_of_delta(self.delta_2k)
    }

    /// `c1^2 m / (alpha n)`, the per-subcarrier estimation error scale.
    fn error_scale(&self, c1: f64) -> f64 {
        c1 * c1 * self.m as f64 / (self.alpha * self.n as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionBounds {
    pub pmd_raw: f64,
    /// `pmd_raw` clamped to `[0, 1]`; 1 when `c_r` diverges.
    pub pmd: f64,
    pub pfa_raw: f64,
    pub pfa: f64,
    pub cr: CrValue,
    pub divergent: bool,
}

/// Missed-detection and false-alarm bounds
/// `P_md <= F(xi) + c_r(xi) c1^2 m sigma^2 / (alpha k2)` and the selected
/// false-alarm variant.
pub fn pmd_pfa_bounds(inp: &BoundInputs, fading: &FadingModel) -> Result<DetectionBounds> {
    let c1 = inp.check()?;
    let xi_norm = inp.xi_thr.sqrt();
    let cr = c_r(xi_norm, fading, 0.0)?;
    let k2 = inp.k2.max(1) as f64;
    let err = c1 * c1 * inp.m as f64 * inp.sigma2 / (inp.alpha * k2);
    let (pmd_raw, divergent) = match cr {
        _ if inp.sigma2 == 0.0 => (fading.norm_cdf(xi_norm), false),
        CrValue::Finite(v) => (fading.norm_cdf(xi_norm) + v * err, false),
        CrValue::Divergent => (f64::INFINITY, true),
    };
    let c1m = c1 * c1 * inp.m as f64;
    let pfa_raw = match inp.pfa_variant {
        PfaVariant::AsPrinted => c1m / (inp.alpha * inp.xi_thr * inp.sigma2),
        PfaVariant::DerivationConsistent if inp.sigma2 == 0.0 => 0.0,
        PfaVariant::DerivationConsistent => c1m * inp.sigma2 / (inp.alpha * inp.xi_thr),
    };
    Ok(DetectionBounds {
        pmd_raw,
        pmd: if divergent { 1.0 } else { pmd_raw.clamp(0.0, 1.0) },
        pfa_raw,
        pfa: if pfa_raw.is_nan() { 1.0 } else { pfa_raw.clamp(0.0, 1.0) },
        cr,
        divergent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBound {
    pub raw: f64,
    /// `raw` clamped below at 0.
    pub value: f64,
}

/// `E log(1 + s |g|^2)` over the per-subcarrier power law.
pub fn expected_log_rate(fading: &FadingModel, snr: f64) -> Result<f64> {
    if snr == 0.0 {
        return Ok(0.0);
    }
    fading.expect_power(|z| (snr * z).ln_1p())
}

/// Rate lower bound in nats per subcarrier:
/// `E log(1 + (1 - alpha) |h|^2 / sigma^2) (1 - P_md)
///  - log(1 + (1 - alpha) c1^2 m / (alpha n))`.
///
/// The conditioning on `||h|| > xi` is taken as independent of the
/// per-subcarrier power.
pub fn rate_lower(inp: &BoundInputs, fading: &FadingModel, pmd: f64) -> Result<RateBound> {
    let c1 = inp.check()?;
    if !(0.0..=1.0).contains(&pmd) {
        return Err(Error::Domain(format!("pmd = {pmd} outside [0, 1]")));
    }
    let data = 1.0 - inp.alpha;
    if data == 0.0 {
        return Ok(RateBound { raw: 0.0, value: 0.0 });
    }
    if inp.sigma2 == 0.0 {
        return Err(Error::Domain("rate bounds need positive noise".into()));
    }
    let first = expected_log_rate(fading, data / inp.sigma2)? * (1.0 - pmd);
    let raw = first - (data * inp.error_scale(c1)).ln_1p();
    Ok(RateBound {
        raw,
        value: raw.max(0.0),
    })
}

/// Rate upper bound in nats per subcarrier:
/// `E log(1 + (1 - alpha) |h|^2 / (sigma^2 (1 + c1^2 m / (n alpha))))`.
pub fn rate_upper(inp: &BoundInputs, fading: &FadingModel) -> Result<f64> {
    let c1 = inp.check()?;
    let data = 1.0 - inp.alpha;
    if data == 0.0 {
        return Ok(0.0);
    }
    if inp.sigma2 == 0.0 {
        return Err(Error::Domain("rate bounds need positive noise".into()));
    }
    expected_log_rate(fading, data / (inp.sigma2 * (1.0 + inp.error_scale(c1))))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorollaryGap {
    /// `E log(1 + |h|^2)`.
    pub lhs: f64,
    /// `E log(1 + (1 - alpha) |h|^2 + alpha)`.
    pub rhs: f64,
    pub lhs_mc: f64,
    pub rhs_mc: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
}

/// Both sides of the MMSE rate comparison by quadrature, cross-checked by
/// `samples` Monte-Carlo draws.
pub fn corollary_gap(alpha: f64, fading: &FadingModel, samples: usize, seed: u64) -> Result<CorollaryGap> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let lhs = fading.expect_power(|z| z.ln_1p())?;
    let rhs = fading.expect_power(|z| ((1.0 - alpha) * z + alpha).ln_1p())?;
    let mut r = rng::stream(seed, rng::Domain::Aux, 11);
    let (mut s1, mut q1, mut s2, mut q2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let z = fading.sample_power(&mut r);
        let a = z.ln_1p();
        let b = ((1.0 - alpha) * z + alpha).ln_1p();
        s1 += a;
        q1 += a * a;
        s2 += b;
        q2 += b * b;
    }
    let n = samples as f64;
    let se = |s: f64, q: f64| ((q / n - (s / n).powi(2)).max(0.0) / (n - 1.0)).sqrt();
    Ok(CorollaryGap {
        lhs,
        rhs,
        lhs_mc: s1 / n,
        rhs_mc: s2 / n,
        lhs_se: se(s1, q1),
        rhs_se: se(s2, q2),
    })
}

/// Slotted-ALOHA throughput `lambda e^{-lambda/B} pr rate`.
pub fn throughput(lambda: f64, b_slots: f64, pr_rate: f64, rate: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(b_slots >= 1.0) || !(0.0..=1.0).contains(&pr_rate) || !(rate >= 0.0) {
        return Err(Error::Domain(format!(
            "lambda = {lambda}, B = {b_slots}, pr = {pr_rate}, rate = {rate}"
        )));
    }
    Ok(lambda * (-lambda / b_slots).exp() * pr_rate * rate)
}

/// BPSK symbol error rate over Rayleigh fading at mean SNR `gamma_bar`.
pub fn ser_rayleigh_bpsk(gamma_bar: f64) -> Result<f64> {
    if !(gamma_bar >= 0.0) {
        return Err(Error::Domain(format!("gamma = {gamma_bar}")));
    }
    if gamma_bar.is_infinite() {
        return Ok(0.0);
    }
    Ok(0.5 * (1.0 - (gamma_bar / (1.0 + gamma_bar)).sqrt()))
}

/// Monte-Carlo mean of `1{x > xi + cutoff} / (x - xi)^2` and its standard
/// error.
pub fn c_r_monte_carlo(xi: f64, fading: &FadingModel, cutoff: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut r = rng::stream(seed, rng::Domain::Aux, 12);
    let (mut s, mut q) = (0.0, 0.0);
    for _ in 0..samples {
        let x = fading.sample_norm(&mut r)?;
        let v = if x > xi + cutoff { (x - xi).powi(-2) } else { 0.0 };
        s += v;
        q += v * v;
    }
    let n = samples as f64;
    Ok((s / n, ((q / n - (s / n).powi(2)).max(0.0) / (n - 1.0)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)`.
    fn e1(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -0.577_215_664_901_532_9 - x.ln() - sum
    }

    fn inputs() -> BoundInputs {
        BoundInputs {
            delta_2k: 0.2,
            m: 839,
            n: 24576,
            alpha: 0.5,
            sigma2: 0.01,
            k2: 10,
            xi_thr: 0.0,
            pfa_variant: PfaVariant::DerivationConsistent,
        }
    }

    #[test]
    fn c1_values() {
        assert_eq!(c1_of_delta(0.0).unwrap(), 4.0);
        let c = c1_of_delta(0.2).unwrap();
        assert!((c - 8.4734).abs() < 1e-3, "{c}");
        // 4 sqrt(1.4) / (1 - 0.9656854) = 4.7328638 / 0.0343146
        assert!((c1_of_delta(0.4).unwrap() - 137.925).abs() < 1e-2);
        assert!(c1_of_delta(SQRT_2 - 1.0).is_err());
        assert!(c1_of_delta(-0.1).is_err());
        let grid: Vec<f64> = (0..41).map(|i| i as f64 * 0.01).collect();
        for w in grid.windows(2) {
            assert!(c1_of_delta(w[1]).unwrap() > c1_of_delta(w[0]).unwrap());
        }
    }

    #[test]
    fn c_r_point_masses() {
        let f = FadingModel::deterministic(1.5, 1.0);
        assert!((c_r(0.5, &f, 0.0).unwrap().finite().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(c_r(1.5, &f, 0.0).unwrap(), CrValue::Finite(0.0));
        assert_eq!(c_r(2.0, &f, 0.0).unwrap(), CrValue::Finite(0.0));
    }

    #[test]
    fn c_r_diverges_for_continuous_density() {
        let f = FadingModel::rayleigh(4);
        assert_eq!(c_r(0.5, &f, 0.0).unwrap(), CrValue::Divergent);
        // x^2 ~ Exp(1) near zero: logarithmic divergence at xi = 0.
        assert_eq!(c_r(0.0, &FadingModel::rayleigh(1), 0.0).unwrap(), CrValue::Divergent);
        // density vanishing like x^7 at zero keeps the integral finite.
        let v = c_r(0.0, &f, 0.0).unwrap().finite().unwrap();
        let exact = f.expect_norm_above(0.0, |x| x.powi(-2)).unwrap();
        assert!((v - exact).abs() < 1e-6 * exact);
        // E[1/x^2] with x^2 ~ Gamma(4, 4) is 4/3.
        assert!((exact - 4.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn c_r_with_cutoff_matches_monte_carlo() {
        let f = FadingModel::rayleigh(4);
        let v = c_r(0.5, &f, 0.1).unwrap().finite().unwrap();
        let (mc, _) = c_r_monte_carlo(0.5, &f, 0.1, 1_000_000, 3).unwrap();
        assert!((v - mc).abs() <= 0.02 * v, "{v} vs {mc}");
    }

    #[test]
    fn noiseless_detection_bounds() {
        let f = FadingModel::rayleigh(4);
        let mut inp = inputs();
        inp.sigma2 = 0.0;
        inp.xi_thr = 0.25;
        let b = pmd_pfa_bounds(&inp, &f).unwrap();
        assert_eq!(b.pmd, f.norm_cdf(0.5));
        assert_eq!(b.pfa, 0.0);
        inp.pfa_variant = PfaVariant::AsPrinted;
        let b = pmd_pfa_bounds(&inp, &f).unwrap();
        assert_eq!(b.pfa, 1.0);
        assert!(b.pfa_raw.is_infinite());
    }

    #[test]
    fn point_mass_detection_bounds_by_hand() {
        let f = FadingModel::deterministic(1.0, 1.0);
        let inp = BoundInputs {
            delta_2k: 0.1,
            m: 64,
            n: 256,
            alpha: 0.5,
            sigma2: 1e-6,
            k2: 2,
            xi_thr: 0.25,
            pfa_variant: PfaVariant::DerivationConsistent,
        };
        let c1 = 4.0 * 1.1f64.sqrt() / (1.0 - (1.0 + SQRT_2) * 0.1);
        let b = pmd_pfa_bounds(&inp, &f).unwrap();
        let pmd = 1.0 / 0.25 * c1 * c1 * 64.0 * 1e-6 / (0.5 * 2.0);
        let pfa = c1 * c1 * 64.0 * 1e-6 / (0.5 * 0.25);
        assert!((b.pmd_raw - pmd).abs() < 1e-12 * pmd);
        assert!((b.pfa_raw - pfa).abs() < 1e-12 * pfa);
    }

    #[test]
    fn divergent_c_r_makes_pmd_vacuous() {
        let mut inp = inputs();
        inp.xi_thr = 0.25;
        let b = pmd_pfa_bounds(&inp, &FadingModel::rayleigh(4)).unwrap();
        assert!(b.divergent);
        assert_eq!(b.pmd, 1.0);
    }

    #[test]
    fn rate_bounds() {
        let f = FadingModel::rayleigh(1);
        let mut inp = inputs();
        let lo = rate_lower(&inp, &f, 0.0).unwrap();
        let c1 = c1_of_delta(0.2).unwrap();
        let scale = c1 * c1 * 839.0 / (0.5 * 24576.0);
        assert!((scale - 4.90).abs() < 0.01);
        // (1 - alpha) scales the error term inside the logarithm.
        let penalty = (1.0 + 0.5 * scale).ln();
        assert!((penalty - 1.2379).abs() < 1e-3, "{penalty}");
        // exact first factor: e^{1/s} E1(1/s) at s = 50
        let first = (1.0f64 / 50.0).exp() * e1(1.0 / 50.0);
        assert!((lo.raw - (first - penalty)).abs() < 1e-8);
        let up = rate_upper(&inp, &f).unwrap();
        let s = 50.0 / (1.0 + scale);
        assert!((up - (1.0 / s).exp() * e1(1.0 / s)).abs() < 1e-8);
        // At 20 dB the upper expression falls below the lower one.
        assert!(up < lo.value);

        let full = rate_lower(&inp, &f, 1.0).unwrap();
        assert_eq!(full.value, 0.0);
        assert!((full.raw + penalty).abs() < 1e-12);

        inp.alpha = 1.0;
        assert_eq!(rate_lower(&inp, &f, 0.2).unwrap().raw, 0.0);
        assert_eq!(rate_upper(&inp, &f).unwrap(), 0.0);
        inp.alpha = 0.0;
        assert!(rate_upper(&inp, &f).is_err());
    }

    #[test]
    fn upper_reduces_to_perfect_csi() {
        let f = FadingModel::rayleigh(1);
        let inp = BoundInputs {
            delta_2k: 0.0,
            m: 1,
            n: 1 << 40,
            alpha: 0.3,
            sigma2: 0.5,
            k2: 1,
            xi_thr: 0.0,
            pfa_variant: PfaVariant::default(),
        };
        let perfect = expected_log_rate(&f, 0.7 / 0.5).unwrap();
        assert!((rate_upper(&inp, &f).unwrap() - perfect).abs() < 1e-9);
    }

    #[test]
    fn corollary_closed_forms() {
        let f = FadingModel::rayleigh(1);
        let g = corollary_gap(0.0, &f, 10_000, 1).unwrap();
        assert!((g.lhs - g.rhs).abs() < 1e-12);
        assert!((g.lhs - std::f64::consts::E * e1(1.0)).abs() < 1e-8);
        let g = corollary_gap(0.5, &f, 100_000, 1).unwrap();
        let rhs = 1.5f64.ln() + 3f64.exp() * e1(3.0);
        assert!((g.rhs - rhs).abs() < 1e-8);
        assert!((g.lhs_mc - g.lhs).abs() < 3.0 * g.lhs_se);
        assert!((g.rhs_mc - g.rhs).abs() < 3.0 * g.rhs_se);
        for i in 0..=20 {
            let g = corollary_gap(i as f64 / 20.0, &f, 10_000, 2).unwrap();
            assert!(g.lhs <= g.rhs + 1e-6);
            let g = corollary_gap(i as f64 / 20.0, &FadingModel::deterministic(1.0, 0.8), 10_000, 2).unwrap();
            assert!(g.lhs <= g.rhs + 1e-6);
        }
    }

    #[test]
    fn throughput_values() {
        assert_eq!(throughput(0.0, 4.0, 1.0, 1.0).unwrap(), 0.0);
        assert!((throughput(1.0, 1.0, 1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(throughput(1.0, 0.5, 1.0, 1.0).is_err());
        for b in [1.0, 4.0, 23.0] {
            let grid: Vec<f64> = (0..=500).map(|i| i as f64 * 5.0 * b / 500.0).collect();
            let best = grid
                .iter()
                .copied()
                .max_by(|x, y| {
                    throughput(*x, b, 1.0, 1.0)
                        .unwrap()
                        .total_cmp(&throughput(*y, b, 1.0, 1.0).unwrap())
                })
                .unwrap();
            assert!((best - b).abs() <= 5.0 * b / 500.0);
        }
    }

    #[test]
    fn rayleigh_bpsk() {
        assert_eq!(ser_rayleigh_bpsk(0.0).unwrap(), 0.5);
        assert_eq!(ser_rayleigh_bpsk(f64::INFINITY).unwrap(), 0.0);
        assert!((ser_rayleigh_bpsk(10.0).unwrap() - 0.02327).abs() < 1e-5);
    }
}
