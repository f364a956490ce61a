use rayon::prelude::*;

use crate::config::Solver;
use crate::detection::detect_active;
use crate::error::{Error, Result};
use crate::model::{generate_frame, Scenario};
use crate::recovery::recover;
use crate::sensing::SensingOperator;
use crate::C64;

/// Channel knowledge at the data receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Csi {
    /// True channels, every active user detected.
    Perfect,
    /// Recovered from the control window, detected by energy threshold.
    Estimated(Solver),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    /// Nats per subcarrier.
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Per-trial mean of `log(1 + SINR)` over the payload subcarriers of the
/// active users, with
/// `SINR = (1 - alpha) |g_hat|^2 / ((1 - alpha) |g - g_hat|^2 + sigma^2)`.
/// Missed users contribute zero.
pub fn trial_rate(scenario: &Scenario, op: &SensingOperator, trial: u64, csi: Csi) -> Result<f64> {
    let cfg = &scenario.cfg;
    let frame = generate_frame(scenario, trial);
    if frame.activity.active.is_empty() {
        return Ok(0.0);
    }
    let truth = frame.channels.compound();
    let (h_hat, detected) = match csi {
        Csi::Perfect => (truth.clone(), frame.activity.active.clone()),
        Csi::Estimated(solver) => {
            let rec = recover(scenario, op, &frame.signals.y_window, solver)?;
            let detected = detect_active(&rec.user_energies, cfg.xi_thr);
            (rec.h_hat, detected)
        }
    };
    let data = 1.0 - cfg.alpha;
    let spectrum = |h: &[C64], u: usize| {
        let mut g = vec![C64::new(0.0, 0.0); cfg.n];
        g[..cfg.t_cp].copy_from_slice(&h[u * cfg.t_cp..(u + 1) * cfg.t_cp]);
        scenario.dft.raw_forward(&mut g);
        g
    };
    let mut total = 0.0;
    let mut count = 0usize;
    for &u in &frame.activity.active {
        let subcarriers = scenario.slots.payload_subcarriers(u);
        count += subcarriers.len();
        if !detected.contains(&u) || data == 0.0 {
            continue;
        }
        let g = spectrum(&truth, u);
        let g_hat = spectrum(&h_hat, u);
        for &f in subcarriers {
            let signal = data * g_hat[f].norm_sqr();
            let interference = data * (g[f] - g_hat[f]).norm_sqr() + cfg.sigma2;
            let sinr = if interference == 0.0 {
                if signal == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                signal / interference
            };
            total += sinr.ln_1p();
        }
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

/// Monte-Carlo ergodic rate of the simulated chain over `trials` seeded
/// frames, with the standard error of the per-trial means.
pub fn mc_ergodic_rate(scenario: &Scenario, trials: usize, csi: Csi) -> Result<RateEstimate> {
    if trials < 2 {
        return Err(Error::Domain("need at least two trials".into()));
    }
    let op = SensingOperator::from_scenario(scenario)?;
    let rates: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_rate(scenario, &op, t, csi))
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RateEstimate {
        mean,
        std_err: (var / n).sqrt(),
        trials,
    })
}
