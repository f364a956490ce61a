//! Shared fixtures for the benchmarks.

use cra_core::model::generate_frame;
use cra_core::{Profile, Scenario, SensingOperator, SystemConfig, C64};

/// Scenario, operator and the first frame's window observation.
pub fn fixture(profile: Profile, sigma2: f64) -> (Scenario, SensingOperator, Vec<C64>) {
    let mut cfg = SystemConfig::profile(profile);
    cfg.sigma2 = sigma2;
    let scenario = Scenario::new(&cfg).expect("profile is valid");
    let op = SensingOperator::from_scenario(&scenario).expect("operator builds");
    let y = generate_frame(&scenario, 0).signals.y_window;
    (scenario, op, y)
}
