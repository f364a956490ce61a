//! Scenario configuration and the flat key-value config file format.
//!
//! ```text
//! # comments start with '#'
//! n = 8192
//! m = 256
//! window_mode = random
//! snr_db = 20
//! ```
//!
//! A file may set any subset of the recognized keys; the remaining values are
//! taken from the base profile. Unrecognized keys are rejected.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

/// Recognized config file keys, in canonical order.
pub const KEYS: [&str; 15] = [
    "n",
    "m",
    "window_mode",
    "t_cp",
    "u_max",
    "k1",
    "k2",
    "b_slots",
    "alpha",
    "snr_db",
    "modulation",
    "bits_per_user",
    "seed",
    "trials",
    "sensing_mode",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowMode {
    /// A contiguous block centred in the band.
    Contiguous,
    /// A uniformly random `m`-subset drawn from the scenario stream.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SensingMode {
    /// `P_B W`: the control window is read straight off the FFT output.
    Plain,
    /// `P_B W M`: time-domain samples are multiplied by fixed random phases
    /// before the FFT.
    Randomized,
}

/// How the pilot power fraction is distributed over the control window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PilotNormalization {
    /// `|p_u(f)|^2 = alpha` on every control subcarrier, mirroring the
    /// per-subcarrier data power `1 - alpha`.
    #[default]
    PerSubcarrier,
    /// `(1/n) ||p_u||^2 = alpha`, i.e. `|p_u(f)|^2 = n alpha / m`.
    TotalEnergy,
}

/// Distribution of the complex gain of each channel tap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TapLaw {
    /// `CN(0, 1/k1)`: Rayleigh fading.
    #[default]
    Gaussian,
    /// Uniform phase, modulus `1/sqrt(k1)`: deterministic channel energy.
    UnitModulus,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Solver {
    #[default]
    Cosamp,
    /// Basis pursuit denoising followed by least-squares debiasing.
    Bpdn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Minutes-scale defaults for sweeps on a workstation.
    Desk,
    /// LTE-like full-scale setting (long running).
    Lte,
    /// Small instance used by unit and acceptance tests.
    Toy,
}

macro_rules! keyword_enum {
    ($ty:ty { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} '{other}'", stringify!($ty)
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let name = match self {
                    $(v if *v == $variant => $name,)+
                    _ => unreachable!(),
                };
                f.write_str(name)
            }
        }
    };
}

keyword_enum!(Modulation { "bpsk" => Modulation::Bpsk, "qpsk" => Modulation::Qpsk });
keyword_enum!(WindowMode { "contiguous" => WindowMode::Contiguous, "random" => WindowMode::Random });
keyword_enum!(SensingMode { "plain" => SensingMode::Plain, "randomized" => SensingMode::Randomized });
keyword_enum!(TapLaw { "gaussian" => TapLaw::Gaussian, "unit_modulus" => TapLaw::UnitModulus });
keyword_enum!(Solver { "cosamp" => Solver::Cosamp, "bpdn" => Solver::Bpdn });
keyword_enum!(Profile { "desk" => Profile::Desk, "lte" => Profile::Lte, "toy" => Profile::Toy });

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// FFT size.
    pub n: usize,
    /// Control window size `|B|`.
    pub m: usize,
    pub window_mode: WindowMode,
    /// Cyclic prefix length; every channel tap delay is below it.
    pub t_cp: usize,
    /// Number of users `U` owning a pilot.
    pub u_max: usize,
    /// Taps per active user.
    pub k1: usize,
    /// Active users per frame.
    pub k2: usize,
    /// Number of data frequency slots.
    pub b_slots: usize,
    /// Pilot power fraction.
    pub alpha: f64,
    /// Per-subcarrier noise variance, `10^(-snr_db/10)`.
    pub sigma2: f64,
    pub modulation: Modulation,
    pub bits_per_user: usize,
    pub seed: u64,
    pub trials: usize,
    pub sensing_mode: SensingMode,
    pub pilot_norm: PilotNormalization,
    /// Energy threshold for activity decisions in link simulation.
    pub xi_thr: f64,
    pub tap_law: TapLaw,
}

impl SystemConfig {
    pub fn profile(profile: Profile) -> Self {
        match profile {
            Profile::Desk => Self {
                n: 8192,
                m: 256,
                window_mode: WindowMode::Random,
                t_cp: 128,
                u_max: 50,
                k1: 4,
                k2: 10,
                b_slots: 50,
                alpha: 0.3,
                sigma2: db_to_sigma2(20.0),
                modulation: Modulation::Bpsk,
                bits_per_user: 125,
                seed: 1,
                trials: 200,
                sensing_mode: SensingMode::Plain,
                pilot_norm: PilotNormalization::PerSubcarrier,
                xi_thr: 0.1,
                tap_law: TapLaw::Gaussian,
            },
            Profile::Lte => Self {
                n: 24576,
                m: 839,
                window_mode: WindowMode::Random,
                t_cp: 300,
                u_max: 100,
                k1: 6,
                k2: 10,
                b_slots: 23,
                alpha: 0.3,
                sigma2: db_to_sigma2(20.0),
                modulation: Modulation::Bpsk,
                bits_per_user: 1000,
                seed: 1,
                trials: 100,
                sensing_mode: SensingMode::Plain,
                pilot_norm: PilotNormalization::PerSubcarrier,
                xi_thr: 0.1,
                tap_law: TapLaw::Gaussian,
            },
            Profile::Toy => Self {
                n: 256,
                m: 64,
                window_mode: WindowMode::Random,
                t_cp: 32,
                u_max: 8,
                k1: 1,
                k2: 5,
                b_slots: 8,
                alpha: 0.5,
                sigma2: 0.0,
                modulation: Modulation::Bpsk,
                bits_per_user: 16,
                seed: 1,
                trials: 100,
                sensing_mode: SensingMode::Plain,
                pilot_norm: PilotNormalization::PerSubcarrier,
                xi_thr: 0.01,
                tap_law: TapLaw::Gaussian,
            },
        }
    }

    /// Total sparsity `k1 * k2` of the compound channel.
    pub fn sparsity(&self) -> usize {
        self.k1 * self.k2
    }

    pub fn snr_db(&self) -> f64 {
        if self.sigma2 == 0.0 {
            f64::INFINITY
        } else {
            -10.0 * self.sigma2.log10()
        }
    }

    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.sigma2 = db_to_sigma2(snr_db);
    }

    pub fn symbols_per_user(&self) -> usize {
        self.bits_per_user / self.modulation.bits_per_symbol()
    }

    /// Number of subcarriers in each data slot.
    pub fn slot_len(&self) -> usize {
        self.n.saturating_sub(self.m) / self.b_slots.max(1)
    }

    /// Residual-ball radius for basis pursuit denoising:
    /// `sigma * sqrt(m + 2 sqrt(m ln 10))`.
    pub fn bpdn_eps(&self) -> f64 {
        let m = self.m as f64;
        (self.sigma2 * (m + 2.0 * (m * 10f64.ln()).sqrt())).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        if self.m == 0 || self.m > self.n {
            return fail(format!("m = {} must lie in [1, n = {}]", self.m, self.n));
        }
        if self.t_cp == 0 || self.t_cp > self.n {
            return fail(format!("t_cp = {} must lie in [1, n = {}]", self.t_cp, self.n));
        }
        if self.k1 > self.t_cp {
            return fail(format!("k1 = {} exceeds t_cp = {}", self.k1, self.t_cp));
        }
        if self.k2 > self.u_max {
            return fail(format!("k2 = {} exceeds u_max = {}", self.k2, self.u_max));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha = {} outside [0, 1]", self.alpha));
        }
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return fail(format!("noise variance {} is invalid", self.sigma2));
        }
        if self.b_slots == 0 {
            return fail("b_slots must be at least 1".into());
        }
        if !self.bits_per_user.is_multiple_of(self.modulation.bits_per_symbol()) {
            return fail(format!(
                "bits_per_user = {} is not a multiple of {} bits per {} symbol",
                self.bits_per_user,
                self.modulation.bits_per_symbol(),
                self.modulation
            ));
        }
        if self.symbols_per_user() > self.slot_len() {
            return fail(format!(
                "{} symbols per user do not fit a data slot of {} subcarriers",
                self.symbols_per_user(),
                self.slot_len()
            ));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.xi_thr >= 0.0) {
            return fail(format!("threshold {} must be nonnegative", self.xi_thr));
        }
        Ok(())
    }

    /// Control subcarrier indices in increasing order.
    pub fn window(&self) -> Vec<usize> {
        match self.window_mode {
            WindowMode::Contiguous => {
                let start = (self.n - self.m) / 2;
                (start..start + self.m).collect()
            }
            WindowMode::Random => {
                let mut r = rng::stream(self.seed, rng::Domain::Scenario, 1);
                let mut w = index::sample(&mut r, self.n, self.m).into_vec();
                w.sort_unstable();
                w
            }
        }
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        self.validate()
    }

    pub fn from_kv(base: Profile, text: &str) -> Result<Self> {
        let mut cfg = Self::profile(base);
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
        }
        match key {
            "n" => self.n = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "window_mode" => self.window_mode = value.parse()?,
            "t_cp" => self.t_cp = num(key, value)?,
            "u_max" => self.u_max = num(key, value)?,
            "k1" => self.k1 = num(key, value)?,
            "k2" => self.k2 = num(key, value)?,
            "b_slots" => self.b_slots = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "snr_db" => self.set_snr_db(num(key, value)?),
            "modulation" => self.modulation = value.parse()?,
            "bits_per_user" => self.bits_per_user = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "sensing_mode" => self.sensing_mode = value.parse()?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Canonical key-value rendering; parsing it back yields `self`.
    pub fn to_kv(&self) -> String {
        let values = [
            self.n.to_string(),
            self.m.to_string(),
            self.window_mode.to_string(),
            self.t_cp.to_string(),
            self.u_max.to_string(),
            self.k1.to_string(),
            self.k2.to_string(),
            self.b_slots.to_string(),
            format!("{:?}", self.alpha),
            format!("{:?}", self.snr_db()),
            self.modulation.to_string(),
            self.bits_per_user.to_string(),
            self.seed.to_string(),
            self.trials.to_string(),
            self.sensing_mode.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical rendering plus the
    /// API-only settings.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_kv());
        h.update(format!(
            "pilot_norm = {:?}\nxi_thr = {:?}\ntap_law = {}\n",
            self.pilot_norm, self.xi_thr, self.tap_law
        ));
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

pub fn db_to_sigma2(snr_db: f64) -> f64 {
    if snr_db.is_infinite() && snr_db > 0.0 {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}
