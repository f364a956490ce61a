use crate::analysis::{pmd_pfa_bounds, rate_lower, rate_upper, throughput, BoundInputs, FadingModel, PfaVariant};
use crate::config::{Solver, SystemConfig};
use crate::detection::{roc_sweep, RocPoint};
use crate::error::{Error, Result};
use crate::model::Scenario;

use super::trial::{run_batch, TrialRecord};

/// One point of a link-level sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkPoint {
    pub alpha: f64,
    /// Pooled symbol error rate, missed users counted as erasures.
    pub ser: f64,
    pub ser_excl_missed: f64,
    /// Mean of `n_md / k2` over trials.
    pub p_md: f64,
    /// Mean of `n_fa / (U - k2)` over trials.
    pub p_fa: f64,
    pub trials: usize,
    pub discarded: usize,
    pub seed: u64,
    pub config_hash: String,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// `0.01, 0.11, ..., 0.91, 1`.
pub fn alpha_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..10).map(|i| (1.0 + 10.0 * i as f64) / 100.0).collect();
    g.push(1.0);
    g
}

/// `count` points spaced evenly in `log10` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

pub fn aggregate(cfg: &SystemConfig, records: &[TrialRecord]) -> LinkPoint {
    let (mut err, mut sym, mut err_det, mut sym_det) = (0.0, 0usize, 0.0, 0usize);
    let (mut md, mut md_n, mut fa, mut fa_n) = (0.0, 0usize, 0.0, 0usize);
    let mut discarded = 0;
    for r in records {
        let m = &r.metrics;
        err += m.symbol_errors;
        sym += m.symbols;
        err_det += m.symbol_errors_detected;
        sym_det += m.symbols_detected;
        if m.n_active_true > 0 {
            md += m.n_md as f64 / m.n_active_true as f64;
            md_n += 1;
        }
        if m.n_inactive_true > 0 {
            fa += m.n_fa as f64 / m.n_inactive_true as f64;
            fa_n += 1;
        }
        discarded += m.discarded as usize;
    }
    let ratio = |a: f64, b: usize| if b == 0 { f64::NAN } else { a / b as f64 };
    LinkPoint {
        alpha: cfg.alpha,
        ser: ratio(err, sym),
        ser_excl_missed: ratio(err_det, sym_det),
        p_md: ratio(md, md_n),
        p_fa: ratio(fa, fa_n),
        trials: records.len(),
        discarded,
        seed: cfg.seed,
        config_hash: cfg.hash(),
    }
}

/// SER and detection rates over a grid of pilot power fractions, `cfg.trials`
/// frames per point.
pub fn sweep_alpha(cfg: &SystemConfig, alphas: &[f64], solver: Solver, threads: usize) -> Result<Vec<LinkPoint>> {
    check_grid(alphas)?;
    alphas
        .iter()
        .map(|&alpha| {
            let mut c = cfg.clone();
            c.alpha = alpha;
            let s = Scenario::new(&c)?;
            let records = run_batch(&s, solver, c.trials, threads)?;
            Ok(aggregate(&c, &records))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocSweep {
    pub points: Vec<RocPoint>,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// One recovery per trial, re-thresholded over `xi_grid`.
pub fn sweep_roc(cfg: &SystemConfig, xi_grid: &[f64], solver: Solver, threads: usize) -> Result<RocSweep> {
    check_grid(xi_grid)?;
    let s = Scenario::new(cfg)?;
    let records = run_batch(&s, solver, cfg.trials, threads)?;
    let batch: Vec<_> = records.into_iter().map(|r| (r.activity, r.user_energies)).collect();
    let points = roc_sweep(&batch, xi_grid)?;
    debug_assert!(points
        .windows(2)
        .all(|w| w[1].p_fa <= w[0].p_fa && w[1].p_md >= w[0].p_md));
    Ok(RocSweep {
        points,
        trials: cfg.trials,
        alpha: cfg.alpha,
        seed: cfg.seed,
        config_hash: cfg.hash(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsGrid {
    pub alphas: Vec<f64>,
    pub delta_2k: f64,
    /// Energy thresholds.
    pub xis: Vec<f64>,
    pub pfa_variant: PfaVariant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub alpha: f64,
    pub delta_2k: f64,
    pub m: usize,
    pub n: usize,
    pub sigma2: f64,
    pub xi: f64,
    pub pmd_bound: f64,
    pub pfa_variant: PfaVariant,
    pub pfa_bound: f64,
    pub rate_lower_raw: f64,
    pub rate_lower: f64,
    pub rate_upper: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// Detection and rate bounds for every `(alpha, xi)` of `grid` with the
/// dimensions and noise level of `cfg`. The rate lower bound uses the
/// reported missed-detection bound.
pub fn bounds_rows(cfg: &SystemConfig, grid: &BoundsGrid, fading: &FadingModel) -> Result<Vec<BoundsRow>> {
    check_grid(&grid.alphas)?;
    check_grid(&grid.xis)?;
    let mut rows = Vec::new();
    for &alpha in &grid.alphas {
        for &xi in &grid.xis {
            let inp = BoundInputs {
                delta_2k: grid.delta_2k,
                m: cfg.m,
                n: cfg.n,
                alpha,
                sigma2: cfg.sigma2,
                k2: cfg.k2,
                xi_thr: xi,
                pfa_variant: grid.pfa_variant,
            };
            let det = pmd_pfa_bounds(&inp, fading)?;
            let lower = rate_lower(&inp, fading, det.pmd)?;
            let mut c = cfg.clone();
            c.alpha = alpha;
            c.xi_thr = xi;
            rows.push(BoundsRow {
                alpha,
                delta_2k: grid.delta_2k,
                m: cfg.m,
                n: cfg.n,
                sigma2: cfg.sigma2,
                xi,
                pmd_bound: det.pmd,
                pfa_variant: grid.pfa_variant,
                pfa_bound: det.pfa,
                rate_lower_raw: lower.raw,
                rate_lower: lower.value,
                rate_upper: rate_upper(&inp, fading)?,
                seed: cfg.seed,
                config_hash: c.hash(),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThroughputRow {
    pub lambda: f64,
    pub b_slots: usize,
    pub pr_rate: f64,
    pub rate: f64,
    pub throughput: f64,
    pub seed: u64,
    pub config_hash: String,
}

pub fn throughput_rows(cfg: &SystemConfig, lambdas: &[f64], pr_rate: f64, rate: f64) -> Result<Vec<ThroughputRow>> {
    check_grid(lambdas)?;
    let hash = cfg.hash();
    lambdas
        .iter()
        .map(|&lambda| {
            Ok(ThroughputRow {
                lambda,
                b_slots: cfg.b_slots,
                pr_rate,
                rate,
                throughput: throughput(lambda, cfg.b_slots as f64, pr_rate, rate)?,
                seed: cfg.seed,
                config_hash: hash.clone(),
            })
        })
        .collect()
}
