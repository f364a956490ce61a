//! Closed-form detection and rate bounds, throughput, and Monte-Carlo
//! references. Rates are in nats.

mod bounds;
mod ergodic;
mod fading;
pub mod quad;

pub use bounds::{
    c1_of_delta, c_r, c_r_monte_carlo, corollary_gap, expected_log_rate, pmd_pfa_bounds, rate_lower, rate_upper,
    ser_rayleigh_bpsk, throughput, BoundInputs, CorollaryGap, CrValue, DetectionBounds, PfaVariant, RateBound,
};
pub use ergodic::{mc_ergodic_rate, trial_rate, Csi, RateEstimate};
pub use fading::{FadingModel, NormLaw, PowerLaw};
