use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::Solver;
use crate::detection::{detect_active, equalize_demodulate, tally, TrialMetrics};
use crate::error::{Error, Result};
use crate::fft::norm;
use crate::model::{generate_frame, ActivityPattern, Scenario};
use crate::recovery::{recover, IterLog};
use crate::sensing::SensingOperator;

#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: u64,
    pub metrics: TrialMetrics,
    pub activity: ActivityPattern,
    /// Estimated `||h_hat_u||^2` of every user, for re-thresholding.
    pub user_energies: Vec<f64>,
    pub detected: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub elapsed: Duration,
}

/// One frame through the full chain: draw, transmit, recover, detect,
/// demodulate, tally.
pub fn run_trial(scenario: &Scenario, op: &SensingOperator, trial: u64, solver: Solver) -> Result<TrialRecord> {
    let start = Instant::now();
    let cfg = &scenario.cfg;
    let frame = generate_frame(scenario, trial);
    let rec = recover(scenario, op, &frame.signals.y_window, solver)?;
    let detected = detect_active(&rec.user_energies, cfg.xi_thr);
    let decoded = equalize_demodulate(scenario, &frame.signals.y_hat, &rec.h_hat, &detected)?;
    let mut metrics = tally(
        cfg.u_max,
        &frame.activity,
        &detected,
        &frame.signals.payloads,
        &decoded,
        cfg.modulation,
    );
    metrics.discarded = norm(&frame.signals.noise_window) > cfg.bpdn_eps();
    metrics.seed = cfg.seed;
    Ok(TrialRecord {
        trial,
        metrics,
        activity: frame.activity,
        user_energies: rec.user_energies,
        detected,
        converged: rec.converged,
        iterations: rec.iterations,
        elapsed: start.elapsed(),
    })
}

/// Trials `0..trials` in parallel; `threads = 0` uses the rayon default.
/// Records are returned in trial order and do not depend on `threads`.
pub fn run_batch(scenario: &Scenario, solver: Solver, trials: usize, threads: usize) -> Result<Vec<TrialRecord>> {
    let op = SensingOperator::from_scenario(scenario)?;
    let job = || {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| run_trial(scenario, &op, t, solver))
            .collect::<Result<Vec<_>>>()
    };
    if threads == 0 {
        return job();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
        .install(job)
}

/// Solver iterate log of a single trial.
pub fn trial_history(scenario: &Scenario, trial: u64, solver: Solver) -> Result<Vec<IterLog>> {
    let op = SensingOperator::from_scenario(scenario)?;
    let frame = generate_frame(scenario, trial);
    Ok(recover(scenario, &op, &frame.signals.y_window, solver)?.history)
}
