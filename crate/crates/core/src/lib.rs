//! Link-level simulation and analysis for one-shot compressive random access.
//!
//! Active users transmit a pilot on a shared, overloaded control window
//! together with an uncoded payload in a dedicated frequency slot. The
//! receiver jointly detects user activity and estimates the sparse multipath
//! channels of all users from the control window alone, then demodulates the
//! payloads of the detected users.
//!
//! Crate layout:
//!
//! * [`model`]: pilots, activity, sparse channels, payloads and the cyclic
//!   OFDM channel.
//! * [`sensing`]: the matrix-free compound measurement operator, its adjoint,
//!   dense materialization and exact restricted isometry constants.
//! * [`recovery`]: CoSaMP, basis pursuit denoising and least-squares debiasing.
//! * [`detection`]: energy detection, equalization, demodulation and ROC tallies.
//! * [`analysis`]: closed-form detection and rate bounds, throughput, and a
//!   Monte-Carlo ergodic rate estimator.
//! * [`harness`]: seeded trial loops, parameter sweeps, CSV emission and the
//!   oracle-equivalence validation suite.

// Negated comparisons are the NaN-rejecting range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod detection;
pub mod error;
pub mod fft;
pub mod harness;
pub mod model;
pub mod recovery;
pub mod rng;
pub mod sensing;

pub use num_complex::Complex64 as C64;

pub use config::{Modulation, PilotNormalization, Profile, SensingMode, Solver, SystemConfig, TapLaw, WindowMode};
pub use error::{Error, Result};
pub use model::{ActivityPattern, ChannelProfile, FrameSignals, PilotBook, Scenario};
pub use recovery::{IterLog, RecoveryResult};
pub use sensing::{DenseOperator, LinearOperator, SensingOperator};
