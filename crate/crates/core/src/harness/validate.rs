use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::{c_r, corollary_gap, throughput, CrValue, FadingModel};
use crate::config::{Profile, SensingMode, SystemConfig, WindowMode};
use crate::error::Result;
use crate::fft::{inner, norm};
use crate::model::{circular_convolve, Scenario};
use crate::recovery::{bpdn, BpdnCfg};
use crate::rng;
use crate::sensing::{
    materialize, rip_constant_exact, DenseOperator, LinearOperator, SensingOperator, MATERIALIZE_CAP,
};
use crate::C64;

/// Deliberate defects for exercising the suite itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Negate the operator adjoint.
    pub flip_adjoint_sign: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

struct Faulty<'a> {
    inner: &'a SensingOperator,
    flip: bool,
}

impl LinearOperator for Faulty<'_> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn block_len(&self) -> usize {
        self.inner.block_len()
    }
    fn apply_unchecked(&self, x: &[C64]) -> Vec<C64> {
        self.inner.apply_unchecked(x)
    }
    fn adjoint_unchecked(&self, y: &[C64]) -> Vec<C64> {
        let mut v = self.inner.adjoint_unchecked(y);
        if self.flip {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        v
    }
}

fn cvec<R: Rng>(n: usize, r: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(StandardNormal.sample(r), StandardNormal.sample(r)))
        .collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Entry `(i, (u, t))` straight from the definition
/// `p_u(w_i) e^{-i 2 pi w_i t / n}`.
fn dense_by_definition(s: &Scenario) -> DMatrix<C64> {
    let c = &s.cfg;
    let w = s.pilots.window();
    DMatrix::from_fn(c.m, c.u_max * c.t_cp, |i, j| {
        let (u, t) = (j / c.t_cp, j % c.t_cp);
        let phase = -std::f64::consts::TAU * ((w[i] * t) % c.n) as f64 / c.n as f64;
        s.pilots.values(u)[i] * C64::from_polar(1.0, phase)
    })
}

/// Oracle-equivalence suite on toy-scale instances.
pub fn validate(faults: Faults) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut r = rng::stream(0x5eed, rng::Domain::Aux, 0);

    // Convolution: FFT identity against the direct circulant sum.
    let n = 256;
    let h = cvec(n, &mut r);
    let x = cvec(n, &mut r);
    let fast = circular_convolve(&h, &x)?;
    let direct: Vec<C64> = (0..n)
        .map(|k| (0..n).map(|j| h[(k + n - j) % n] * x[j]).sum())
        .collect();
    let err = max_diff(&fast, &direct);
    report.push("fft_vs_direct_convolution", err <= 1e-9, format!("max error {err:.3e}"));

    // Matrix-free operator against the dense definition and the adjoint
    // identity, in both sensing modes.
    let mut worst_dense = 0.0f64;
    let mut worst_adjoint = 0.0f64;
    for mode in [SensingMode::Plain, SensingMode::Randomized] {
        for window in [WindowMode::Contiguous, WindowMode::Random] {
            let mut c = SystemConfig::profile(Profile::Toy);
            c.sensing_mode = mode;
            c.window_mode = window;
            let s = Scenario::new(&c)?;
            let op = SensingOperator::from_scenario(&s)?;
            if mode == SensingMode::Plain {
                let a = dense_by_definition(&s);
                for _ in 0..5 {
                    let v = cvec(op.cols(), &mut r);
                    let dense = DenseOperator::new(a.clone()).apply(&v)?;
                    worst_dense = worst_dense.max(max_diff(&op.apply(&v)?, &dense));
                }
            }
            let faulty = Faulty {
                inner: &op,
                flip: faults.flip_adjoint_sign,
            };
            for _ in 0..20 {
                let v = cvec(op.cols(), &mut r);
                let y = cvec(op.rows(), &mut r);
                let lhs = inner(&faulty.apply(&v)?, &y);
                let rhs = inner(&v, &faulty.adjoint(&y)?);
                worst_adjoint = worst_adjoint.max((lhs - rhs).norm() / lhs.norm().max(1.0));
            }
        }
    }
    report.push(
        "matrix_free_vs_dense",
        worst_dense <= 1e-10,
        format!("max error {worst_dense:.3e}"),
    );
    report.push(
        "adjoint_identity",
        worst_adjoint <= 1e-10,
        format!("max relative mismatch {worst_adjoint:.3e}"),
    );

    // Exact RIP constants are nondecreasing in the order.
    let mut c = SystemConfig::profile(Profile::Toy);
    c.u_max = 6;
    c.t_cp = 4;
    c.k1 = 1;
    c.k2 = 2;
    c.b_slots = 6;
    let s = Scenario::new(&c)?;
    let a = materialize(&SensingOperator::from_scenario(&s)?, MATERIALIZE_CAP)?;
    let deltas: Vec<f64> = (1..=4)
        .map(|k| rip_constant_exact(&a, k).map(|rep| rep.delta_k))
        .collect::<Result<_>>()?;
    let monotone = deltas.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    report.push("rip_monotone", monotone, format!("delta_1..4 = {deltas:.4?}"));

    // BPDN on the same instance: feasible, converged, no worse than the truth.
    let mut truth = vec![C64::new(0.0, 0.0); a.ncols()];
    truth[1] = C64::new(0.8, -0.3);
    truth[14] = C64::new(-0.5, 0.9);
    let dense = DenseOperator::new(a);
    let noise: Vec<C64> = cvec(dense.rows(), &mut r).iter().map(|v| v * 1e-3).collect();
    let y: Vec<C64> = dense.apply(&truth)?.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let eps = norm(&noise) * 1.05;
    let out = bpdn(&dense, &y, eps, &BpdnCfg::default())?;
    let l1: f64 = out.h_hat.iter().map(|v| v.norm()).sum();
    let l1_truth: f64 = truth.iter().map(|v| v.norm()).sum();
    let ok = out.converged && out.residual_norm <= eps * 1.001 && l1 <= l1_truth * 1.001;
    report.push(
        "bpdn_certificate",
        ok,
        format!(
            "converged {} residual {:.3e} (eps {:.3e}) l1 {:.4} (truth {:.4})",
            out.converged, out.residual_norm, eps, l1, l1_truth
        ),
    );

    // Throughput peaks at lambda = B.
    let b = 8.0;
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 5.0 * b / 400.0).collect();
    let mut best = (0.0, f64::NEG_INFINITY);
    for &l in &grid {
        let t = throughput(l, b, 1.0, 1.0)?;
        if t > best.1 {
            best = (l, t);
        }
    }
    report.push(
        "throughput_peak",
        (best.0 - b).abs() <= 5.0 * b / 400.0,
        format!("argmax lambda {} for B = {b}", best.0),
    );

    // Corollary inequality over an alpha grid.
    let fading = FadingModel::rayleigh(1);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=10 {
        let g = corollary_gap(i as f64 / 10.0, &fading, 10_000, 1)?;
        worst = worst.max(g.lhs - g.rhs);
    }
    report.push(
        "corollary_inequality",
        worst <= 1e-6,
        format!("max lhs - rhs {worst:.3e}"),
    );

    // c_r of a continuous norm law diverges as the cutoff shrinks.
    let cr = c_r(0.5, &FadingModel::rayleigh(4), 0.0)?;
    report.push("c_r_divergence_detected", cr == CrValue::Divergent, format!("{cr:?}"));
    Ok(report)
}
