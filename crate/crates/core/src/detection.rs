//! Activity decisions, per-subcarrier equalization and error tallies.

use crate::config::Modulation;
use crate::error::{Error, Result};
use crate::model::{demodulate, ActivityPattern, Payload, Scenario};
use crate::C64;

/// Channel gains below this magnitude are treated as unusable.
pub const MIN_GAIN: f64 = 1e-12;

/// Users whose estimated energy strictly exceeds `xi_thr`.
pub fn detect_active(user_energies: &[f64], xi_thr: f64) -> Vec<usize> {
    user_energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > xi_thr)
        .map(|(u, _)| u)
        .collect()
}

/// Hard decisions for one detected user.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub user: usize,
    pub bits: Vec<u8>,
    /// Per symbol: the estimated gain was below [`MIN_GAIN`].
    pub erased: Vec<bool>,
}

/// Matched-filter equalization `y(f) conj(g) / |g|^2` on each payload
/// subcarrier of every detected user, with `g` the DFT of the estimated taps.
pub fn equalize_demodulate(
    scenario: &Scenario,
    y_hat: &[C64],
    h_hat: &[C64],
    detected: &[usize],
) -> Result<Vec<Decoded>> {
    let cfg = &scenario.cfg;
    if y_hat.len() != cfg.n {
        return Err(Error::Dimension {
            expected: cfg.n,
            got: y_hat.len(),
        });
    }
    if h_hat.len() != cfg.u_max * cfg.t_cp {
        return Err(Error::Dimension {
            expected: cfg.u_max * cfg.t_cp,
            got: h_hat.len(),
        });
    }
    let mut out = Vec::with_capacity(detected.len());
    let mut g = vec![C64::new(0.0, 0.0); cfg.n];
    for &u in detected {
        g.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        g[..cfg.t_cp].copy_from_slice(&h_hat[u * cfg.t_cp..(u + 1) * cfg.t_cp]);
        scenario.dft.raw_forward(&mut g);
        let mut erased = Vec::new();
        let symbols: Vec<C64> = scenario
            .slots
            .payload_subcarriers(u)
            .iter()
            .map(|&f| {
                let gf = g[f];
                let p = gf.norm_sqr();
                erased.push(p.sqrt() < MIN_GAIN);
                if p.sqrt() < MIN_GAIN {
                    C64::new(0.0, 0.0)
                } else {
                    y_hat[f] * gf.conj() / p
                }
            })
            .collect();
        out.push(Decoded {
            user: u,
            bits: demodulate(&symbols, cfg.modulation),
            erased,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    /// Symbol error rate over all true active users, missed users counted as
    /// erasures. `NaN` without active users.
    pub ser: f64,
    /// Symbol error rate over detected true active users only.
    pub ser_excl_missed: f64,
    /// Expected symbol errors, erasures contributing `1 - 1/M` each.
    pub symbol_errors: f64,
    pub symbols: usize,
    pub symbol_errors_detected: f64,
    pub symbols_detected: usize,
    pub n_md: usize,
    pub n_fa: usize,
    pub n_active_true: usize,
    pub n_inactive_true: usize,
    /// Window noise exceeded the BPDN radius.
    pub discarded: bool,
    /// Some payload subcarrier had an unusable gain estimate.
    pub erasure_flag: bool,
    pub seed: u64,
}

/// Counts detections and symbol errors of one trial.
pub fn tally(
    users: usize,
    truth: &ActivityPattern,
    detected: &[usize],
    tx: &[Payload],
    rx: &[Decoded],
    modulation: Modulation,
) -> TrialMetrics {
    let bps = modulation.bits_per_symbol();
    let erasure = 1.0 - 1.0 / modulation.order() as f64;
    let n_md = truth.active.iter().filter(|u| !detected.contains(u)).count();
    let n_fa = detected.iter().filter(|&&u| !truth.is_active(u)).count();

    let mut errors = 0.0;
    let mut symbols = 0;
    let mut errors_det = 0.0;
    let mut symbols_det = 0;
    let mut erasure_flag = false;
    for p in tx {
        let count = p.symbols.len();
        symbols += count;
        match rx.iter().find(|d| d.user == p.user) {
            None => errors += erasure * count as f64,
            Some(d) => {
                let mut e = 0.0;
                for s in 0..count {
                    if d.erased.get(s).copied().unwrap_or(true) {
                        erasure_flag = true;
                        e += erasure;
                    } else if p.bits[s * bps..(s + 1) * bps] != d.bits[s * bps..(s + 1) * bps] {
                        e += 1.0;
                    }
                }
                errors += e;
                errors_det += e;
                symbols_det += count;
            }
        }
    }
    let ratio = |e: f64, s: usize| if s == 0 { f64::NAN } else { e / s as f64 };
    TrialMetrics {
        ser: ratio(errors, symbols),
        ser_excl_missed: ratio(errors_det, symbols_det),
        symbol_errors: errors,
        symbols,
        symbol_errors_detected: errors_det,
        symbols_detected: symbols_det,
        n_md,
        n_fa,
        n_active_true: truth.active.len(),
        n_inactive_true: users - truth.active.len(),
        discarded: false,
        erasure_flag,
        seed: 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub xi: f64,
    pub p_md: f64,
    pub p_fa: f64,
}

/// Re-thresholds cached per-trial energies over `xi_grid`.
///
/// `P_md` averages `n_md / k2` over trials with active users, `P_fa` averages
/// `n_fa / (U - k2)` over trials with inactive users.
pub fn roc_sweep(batch: &[(ActivityPattern, Vec<f64>)], xi_grid: &[f64]) -> Result<Vec<RocPoint>> {
    if xi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut points = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let (mut md, mut md_n, mut fa, mut fa_n) = (0.0, 0usize, 0.0, 0usize);
        for (truth, energies) in batch {
            let k2 = truth.active.len();
            let inactive = energies.len() - k2;
            let missed = truth.active.iter().filter(|&&u| energies[u] <= xi).count();
            let false_alarms = energies
                .iter()
                .enumerate()
                .filter(|(u, &e)| e > xi && !truth.is_active(*u))
                .count();
            if k2 > 0 {
                md += missed as f64 / k2 as f64;
                md_n += 1;
            }
            if inactive > 0 {
                fa += false_alarms as f64 / inactive as f64;
                fa_n += 1;
            }
        }
        let avg = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
        points.push(RocPoint {
            xi,
            p_md: avg(md, md_n),
            p_fa: avg(fa, fa_n),
        });
    }
    Ok(points)
}
