//! Transmit side and the cyclic channel.
//!
//! All frequency-domain quantities use the unitary transform of [`crate::fft`].
//! A user's channel enters the received spectrum through its raw frequency
//! response `g_u(f) = sum_t h_u(t) e^{-i 2 pi f t / n}`, which equals
//! `sqrt(n) * (W [h_u, 0])(f)`:
//!
//! ```text
//! y_hat(f) = sum_u g_u(f) (p_u(f) + x_u(f)) + e_hat(f)
//! ```

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{Modulation, PilotNormalization, SensingMode, SystemConfig, TapLaw};
use crate::error::{Error, Result};
use crate::fft::Dft;
use crate::rng;
use crate::C64;

/// Frequency-domain pilots, stored on the control window only.
#[derive(Clone, Debug)]
pub struct PilotBook {
    n: usize,
    window: Vec<usize>,
    /// `values[u][i]` is `p_u(window[i])`.
    values: Vec<Vec<C64>>,
}

impl PilotBook {
    pub fn from_values(n: usize, window: Vec<usize>, values: Vec<Vec<C64>>) -> Result<Self> {
        for v in &values {
            if v.len() != window.len() {
                return Err(Error::Dimension {
                    expected: window.len(),
                    got: v.len(),
                });
            }
        }
        if window.iter().any(|&f| f >= n) {
            return Err(Error::Config("pilot window index out of range".into()));
        }
        Ok(Self { n, window, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.values.len()
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn values(&self, user: usize) -> &[C64] {
        &self.values[user]
    }

    /// Full length-`n` pilot spectrum of `user`.
    pub fn spectrum(&self, user: usize) -> Vec<C64> {
        let mut s = vec![C64::new(0.0, 0.0); self.n];
        for (&f, &v) in self.window.iter().zip(&self.values[user]) {
            s[f] = v;
        }
        s
    }

    /// `||p_u||^2`, identical in time and frequency domain.
    pub fn energy(&self, user: usize) -> f64 {
        crate::fft::norm_sqr(&self.values[user])
    }

    /// True when every pilot is zero; activity detection is then impossible.
    pub fn is_silent(&self) -> bool {
        self.values.iter().flatten().all(|v| *v == C64::new(0.0, 0.0))
    }
}

/// Draws unit-modulus random-phase pilots on the control window, scaled to
/// the pilot power fraction.
pub fn build_pilot_book<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> PilotBook {
    let window = cfg.window();
    let amplitude = match cfg.pilot_norm {
        PilotNormalization::PerSubcarrier => cfg.alpha.sqrt(),
        PilotNormalization::TotalEnergy => (cfg.n as f64 * cfg.alpha / cfg.m as f64).sqrt(),
    };
    let values = (0..cfg.u_max)
        .map(|_| {
            (0..cfg.m)
                .map(|_| C64::from_polar(amplitude, random_phase(rng)))
                .collect()
        })
        .collect();
    PilotBook {
        n: cfg.n,
        window,
        values,
    }
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * std::f64::consts::TAU
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

/// Fixed unit-modulus time-domain multipliers for the randomized sensing mode.
pub fn draw_multipliers<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| C64::from_polar(1.0, random_phase(rng))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivityPattern {
    /// Active user indices (0-based), increasing.
    pub active: Vec<usize>,
}

impl ActivityPattern {
    pub fn is_active(&self, user: usize) -> bool {
        self.active.binary_search(&user).is_ok()
    }
}

/// Uniformly random `k2`-subset of the `u_max` users.
pub fn draw_activity<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ActivityPattern {
    let mut active = index::sample(rng, cfg.u_max, cfg.k2).into_vec();
    active.sort_unstable();
    ActivityPattern { active }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub delay: usize,
    pub gain: C64,
}

/// Sparse channel impulse responses of all users.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelProfile {
    t_cp: usize,
    taps: Vec<Vec<Tap>>,
}

impl ChannelProfile {
    pub fn zero(users: usize, t_cp: usize) -> Self {
        Self {
            t_cp,
            taps: vec![Vec::new(); users],
        }
    }

    pub fn from_taps(t_cp: usize, taps: Vec<Vec<Tap>>) -> Result<Self> {
        if let Some(t) = taps.iter().flatten().find(|t| t.delay >= t_cp) {
            return Err(Error::Domain(format!("tap delay {} >= t_cp {t_cp}", t.delay)));
        }
        Ok(Self { t_cp, taps })
    }

    /// Reads a compound vector `[h_1; ...; h_U]`, keeping nonzero entries.
    pub fn from_compound(t_cp: usize, h: &[C64]) -> Self {
        let taps = h
            .chunks(t_cp)
            .map(|hu| {
                hu.iter()
                    .enumerate()
                    .filter(|(_, g)| **g != C64::new(0.0, 0.0))
                    .map(|(delay, &gain)| Tap { delay, gain })
                    .collect()
            })
            .collect();
        Self { t_cp, taps }
    }

    pub fn t_cp(&self) -> usize {
        self.t_cp
    }

    pub fn users(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self, user: usize) -> &[Tap] {
        &self.taps[user]
    }

    /// Compound vector of length `users * t_cp`.
    pub fn compound(&self) -> Vec<C64> {
        let mut h = vec![C64::new(0.0, 0.0); self.taps.len() * self.t_cp];
        for (u, taps) in self.taps.iter().enumerate() {
            for t in taps {
                h[u * self.t_cp + t.delay] += t.gain;
            }
        }
        h
    }

    /// Zero-padded time-domain response of `user`, length `n`.
    pub fn padded(&self, user: usize, n: usize) -> Vec<C64> {
        let mut h = vec![C64::new(0.0, 0.0); n];
        for t in &self.taps[user] {
            h[t.delay] += t.gain;
        }
        h
    }

    /// `g_u(f) = sum_t h_u(t) e^{-i 2 pi f t / n}` for all `f`.
    pub fn frequency_response(&self, user: usize, dft: &Dft) -> Vec<C64> {
        let mut g = self.padded(user, dft.len());
        dft.raw_forward(&mut g);
        g
    }

    pub fn energy(&self, user: usize) -> f64 {
        self.taps[user].iter().map(|t| t.gain.norm_sqr()).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.taps.iter().map(Vec::len).sum()
    }
}

/// Each active user gets `k1` distinct uniform delays in `[0, t_cp)` with
/// i.i.d. circular complex Gaussian gains of variance `1/k1`.
pub fn draw_channels<R: Rng + ?Sized>(cfg: &SystemConfig, activity: &ActivityPattern, rng: &mut R) -> ChannelProfile {
    let mut taps = vec![Vec::new(); cfg.u_max];
    let variance = 1.0 / cfg.k1.max(1) as f64;
    for &u in &activity.active {
        let mut delays = index::sample(rng, cfg.t_cp, cfg.k1).into_vec();
        delays.sort_unstable();
        taps[u] = delays
            .into_iter()
            .map(|delay| Tap {
                delay,
                gain: match cfg.tap_law {
                    TapLaw::Gaussian => complex_gaussian(rng, variance),
                    TapLaw::UnitModulus => C64::from_polar(variance.sqrt(), random_phase(rng)),
                },
            })
            .collect();
    }
    ChannelProfile { t_cp: cfg.t_cp, taps }
}

/// `circ(h) s` via the FFT identity `circ([h,0]) s = sqrt(n) W* (W h . W s)`.
pub fn circular_convolve(h_padded: &[C64], s: &[C64]) -> Result<Vec<C64>> {
    if h_padded.len() != s.len() {
        return Err(Error::Dimension {
            expected: h_padded.len(),
            got: s.len(),
        });
    }
    let n = s.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dft = Dft::new(n);
    let mut hf = h_padded.to_vec();
    let mut sf = s.to_vec();
    dft.raw_forward(&mut hf);
    dft.raw_forward(&mut sf);
    for (a, b) in sf.iter_mut().zip(&hf) {
        *a *= b / n as f64;
    }
    dft.raw_inverse(&mut sf);
    Ok(sf)
}

/// Maps users to data slots (`u mod B`) and slots to subcarriers.
#[derive(Clone, Debug)]
pub struct SlotMap {
    data_subcarriers: Vec<usize>,
    slot_len: usize,
    slots: usize,
    symbols: usize,
}

impl SlotMap {
    pub fn new(cfg: &SystemConfig, window: &[usize]) -> Self {
        let mut in_window = vec![false; cfg.n];
        window.iter().for_each(|&f| in_window[f] = true);
        let data_subcarriers: Vec<usize> = (0..cfg.n).filter(|&f| !in_window[f]).collect();
        Self {
            slot_len: data_subcarriers.len() / cfg.b_slots,
            data_subcarriers,
            slots: cfg.b_slots,
            symbols: cfg.symbols_per_user(),
        }
    }

    pub fn slot_of(&self, user: usize) -> usize {
        user % self.slots
    }

    pub fn slot_subcarriers(&self, slot: usize) -> &[usize] {
        &self.data_subcarriers[slot * self.slot_len..(slot + 1) * self.slot_len]
    }

    /// Subcarriers carrying the payload of `user`: the head of its slot.
    pub fn payload_subcarriers(&self, user: usize) -> &[usize] {
        &self.slot_subcarriers(self.slot_of(user))[..self.symbols]
    }
}

/// Scenario-level state shared by all trials: window, pilots, multipliers and
/// slot layout, drawn once from the master seed.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub cfg: SystemConfig,
    pub pilots: PilotBook,
    pub multipliers: Option<Vec<C64>>,
    pub slots: SlotMap,
    pub dft: Dft,
}

impl Scenario {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let mut r = rng::scenario_stream(cfg.seed);
        let pilots = build_pilot_book(cfg, &mut r);
        let multipliers = match cfg.sensing_mode {
            SensingMode::Plain => None,
            SensingMode::Randomized => Some(draw_multipliers(cfg.n, &mut r)),
        };
        let slots = SlotMap::new(cfg, pilots.window());
        Ok(Self {
            cfg: cfg.clone(),
            pilots,
            multipliers,
            slots,
            dft: Dft::new(cfg.n),
        })
    }

    /// Applies `P_B W M W*` to a full spectrum (plain mode: `P_B`).
    pub fn observe_window(&self, spectrum: &[C64]) -> Vec<C64> {
        match &self.multipliers {
            None => self.pilots.window().iter().map(|&f| spectrum[f]).collect(),
            Some(mult) => {
                let mut t = spectrum.to_vec();
                self.dft.inverse(&mut t);
                t.iter_mut().zip(mult).for_each(|(v, m)| *v *= m);
                self.dft.forward(&mut t);
                self.pilots.window().iter().map(|&f| t[f]).collect()
            }
        }
    }
}

/// Payload of one active user.
#[derive(Clone, Debug, PartialEq)]
pub struct Payload {
    pub user: usize,
    pub bits: Vec<u8>,
    /// Transmitted symbols including the `sqrt(1 - alpha)` amplitude.
    pub symbols: Vec<C64>,
}

/// Unit-energy constellation mapping (bit 0 maps to +1).
pub fn modulate(bits: &[u8], modulation: Modulation) -> Vec<C64> {
    match modulation {
        Modulation::Bpsk => bits.iter().map(|&b| C64::new(1.0 - 2.0 * b as f64, 0.0)).collect(),
        Modulation::Qpsk => bits
            .chunks(2)
            .map(|p| C64::new(1.0 - 2.0 * p[0] as f64, 1.0 - 2.0 * p[1] as f64) * std::f64::consts::FRAC_1_SQRT_2)
            .collect(),
    }
}

/// Nearest-point decision back to bits.
pub fn demodulate(symbols: &[C64], modulation: Modulation) -> Vec<u8> {
    match modulation {
        Modulation::Bpsk => symbols.iter().map(|s| (s.re < 0.0) as u8).collect(),
        Modulation::Qpsk => symbols
            .iter()
            .flat_map(|s| [(s.re < 0.0) as u8, (s.im < 0.0) as u8])
            .collect(),
    }
}

pub fn draw_payloads<R: Rng + ?Sized>(cfg: &SystemConfig, activity: &ActivityPattern, rng: &mut R) -> Vec<Payload> {
    let amplitude = (1.0 - cfg.alpha).max(0.0).sqrt();
    activity
        .active
        .iter()
        .map(|&user| {
            let bits: Vec<u8> = (0..cfg.bits_per_user).map(|_| rng.random::<bool>() as u8).collect();
            let symbols = modulate(&bits, cfg.modulation)
                .into_iter()
                .map(|s| s * amplitude)
                .collect();
            Payload { user, bits, symbols }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct FrameSignals {
    pub payloads: Vec<Payload>,
    /// Received spectrum, length `n`.
    pub y_hat: Vec<C64>,
    /// Control window observation, length `m`.
    pub y_window: Vec<C64>,
    /// Noise spectrum `e_hat`, length `n`.
    pub noise_hat: Vec<C64>,
    /// Noise component of `y_window`.
    pub noise_window: Vec<C64>,
}

/// Passes pilots and payloads of all users through their channels and adds
/// white Gaussian noise of variance `sigma2` per subcarrier.
pub fn transmit_receive<R: Rng + ?Sized>(
    scenario: &Scenario,
    payloads: Vec<Payload>,
    channels: &ChannelProfile,
    rng: &mut R,
) -> FrameSignals {
    let cfg = &scenario.cfg;
    let n = cfg.n;
    let window = scenario.pilots.window();
    let mut y_hat = vec![C64::new(0.0, 0.0); n];

    let mut transmitting: Vec<usize> = payloads.iter().map(|p| p.user).collect();
    for u in 0..channels.users() {
        if !channels.taps(u).is_empty() && !transmitting.contains(&u) {
            transmitting.push(u);
        }
    }
    transmitting.sort_unstable();
    transmitting.dedup();

    for &u in &transmitting {
        if channels.taps(u).is_empty() {
            continue;
        }
        let g = channels.frequency_response(u, &scenario.dft);
        for (&f, &p) in window.iter().zip(scenario.pilots.values(u)) {
            y_hat[f] += g[f] * p;
        }
        if let Some(payload) = payloads.iter().find(|p| p.user == u) {
            for (&f, &s) in scenario.slots.payload_subcarriers(u).iter().zip(&payload.symbols) {
                y_hat[f] += g[f] * s;
            }
        }
    }

    let noise_hat: Vec<C64> = (0..n).map(|_| complex_gaussian(rng, cfg.sigma2)).collect();
    y_hat.iter_mut().zip(&noise_hat).for_each(|(y, e)| *y += e);

    let y_window = scenario.observe_window(&y_hat);
    let noise_window = scenario.observe_window(&noise_hat);
    FrameSignals {
        payloads,
        y_hat,
        y_window,
        noise_hat,
        noise_window,
    }
}

/// Everything drawn for one trial.
#[derive(Clone, Debug)]
pub struct Frame {
    pub activity: ActivityPattern,
    pub channels: ChannelProfile,
    pub signals: FrameSignals,
}

/// Draws activity, channels, payloads and noise from the trial stream.
pub fn generate_frame(scenario: &Scenario, trial: u64) -> Frame {
    let mut r = rng::trial_stream(scenario.cfg.seed, trial);
    let activity = draw_activity(&scenario.cfg, &mut r);
    let channels = draw_channels(&scenario.cfg, &activity, &mut r);
    let payloads = draw_payloads(&scenario.cfg, &activity, &mut r);
    let signals = transmit_receive(scenario, payloads, &channels, &mut r);
    Frame {
        activity,
        channels,
        signals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Profile, WindowMode};
    use crate::fft::norm_sqr;

    fn small_cfg() -> SystemConfig {
        let mut c = SystemConfig::profile(Profile::Toy);
        c.n = 64;
        c.m = 16;
        c.t_cp = 8;
        c.u_max = 4;
        c.k1 = 2;
        c.k2 = 2;
        c.b_slots = 4;
        c.bits_per_user = 8;
        c
    }

    /// Direct `O(n^2)` circulant product: first column `h`.
    fn circulant_oracle(h: &[C64], s: &[C64]) -> Vec<C64> {
        let n = h.len();
        (0..n)
            .map(|i| (0..n).map(|j| h[(i + n - j) % n] * s[j]).sum())
            .collect()
    }

    fn random_vec<R: Rng>(n: usize, r: &mut R) -> Vec<C64> {
        (0..n).map(|_| complex_gaussian(r, 1.0)).collect()
    }

    #[test]
    fn zero_alpha_gives_silent_pilots() {
        let mut c = small_cfg();
        c.alpha = 0.0;
        let book = build_pilot_book(&c, &mut rng::scenario_stream(1));
        assert!(book.is_silent());
    }

    #[test]
    fn total_energy_pilots_meet_power_fraction() {
        let mut c = small_cfg();
        c.n = 16;
        c.m = 8;
        c.t_cp = 4;
        c.window_mode = WindowMode::Contiguous;
        c.alpha = 0.5;
        c.pilot_norm = PilotNormalization::TotalEnergy;
        c.bits_per_user = 1;
        let book = build_pilot_book(&c, &mut rng::scenario_stream(3));
        for u in 0..c.u_max {
            assert!((book.energy(u) / 16.0 - 0.5).abs() < 1e-12);
            let s = book.spectrum(u);
            for (f, v) in s.iter().enumerate() {
                assert_eq!(book.window().contains(&f), v.norm() > 0.0);
            }
        }
    }

    #[test]
    fn per_subcarrier_pilots_have_power_alpha() {
        let mut c = small_cfg();
        c.alpha = 0.3;
        let book = build_pilot_book(&c, &mut rng::scenario_stream(3));
        for u in 0..c.u_max {
            for v in book.values(u) {
                assert!((v.norm_sqr() - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pilot_books_are_deterministic_and_distinct() {
        let c = small_cfg();
        let a = build_pilot_book(&c, &mut rng::scenario_stream(5));
        let b = build_pilot_book(&c, &mut rng::scenario_stream(5));
        for u in 0..c.u_max {
            assert_eq!(a.values(u), b.values(u));
        }
        assert_ne!(a.values(0), a.values(1));
    }

    #[test]
    fn activity_edge_cases() {
        let mut c = small_cfg();
        c.k2 = 0;
        assert!(draw_activity(&c, &mut rng::trial_stream(1, 0)).active.is_empty());
        c.k2 = c.u_max;
        assert_eq!(
            draw_activity(&c, &mut rng::trial_stream(1, 0)).active,
            (0..c.u_max).collect::<Vec<_>>()
        );
    }

    #[test]
    fn activity_is_uniform() {
        let mut c = small_cfg();
        c.u_max = 100;
        c.k2 = 10;
        let mut counts = vec![0usize; 100];
        let mut r = rng::trial_stream(11, 0);
        let draws = 10_000;
        for _ in 0..draws {
            for u in draw_activity(&c, &mut r).active {
                counts[u] += 1;
            }
        }
        for cnt in counts {
            let freq = cnt as f64 / draws as f64;
            assert!((freq - 0.1).abs() <= 0.01, "{freq}");
        }
    }

    #[test]
    fn channels_respect_support_and_sparsity() {
        let mut c = SystemConfig::profile(Profile::Lte);
        c.k2 = 10;
        let mut r = rng::trial_stream(2, 0);
        let act = draw_activity(&c, &mut r);
        let ch = draw_channels(&c, &act, &mut r);
        assert_eq!(ch.nonzeros(), c.k1 * c.k2);
        for u in 0..c.u_max {
            if act.is_active(u) {
                assert_eq!(ch.taps(u).len(), 6);
                let mut d: Vec<_> = ch.taps(u).iter().map(|t| t.delay).collect();
                d.dedup();
                assert_eq!(d.len(), 6);
            } else {
                assert!(ch.taps(u).is_empty());
            }
            assert!(ch.taps(u).iter().all(|t| t.delay < 300));
            let padded = ch.padded(u, c.n);
            assert!(padded[300..].iter().all(|v| *v == C64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn no_active_users_give_zero_channel() {
        let mut c = small_cfg();
        c.k2 = 0;
        let ch = draw_channels(&c, &ActivityPattern { active: vec![] }, &mut rng::trial_stream(0, 0));
        assert!(ch.compound().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn channel_energy_is_normalized() {
        let mut c = small_cfg();
        c.k1 = 6;
        c.t_cp = 300;
        c.n = 1024;
        c.u_max = 1;
        c.k2 = 1;
        let act = ActivityPattern { active: vec![0] };
        let mut r = rng::trial_stream(13, 0);
        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|_| draw_channels(&c, &act, &mut r).energy(0))
            .sum::<f64>()
            / draws as f64;
        // Gamma(6, 1/6): standard error 0.0041.
        assert!((mean - 1.0).abs() <= 0.03, "{mean}");
    }

    #[test]
    fn unit_modulus_taps_have_unit_energy() {
        let mut c = small_cfg();
        c.tap_law = TapLaw::UnitModulus;
        let act = ActivityPattern { active: vec![0, 2] };
        let ch = draw_channels(&c, &act, &mut rng::trial_stream(5, 0));
        for u in [0, 2] {
            assert!((ch.energy(u) - 1.0).abs() < 1e-12);
            for t in ch.taps(u) {
                assert!((t.gain.norm() - 1.0 / (c.k1 as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_with_impulses() {
        let mut r = rng::trial_stream(4, 0);
        let s = random_vec(8, &mut r);
        let mut h = vec![C64::new(0.0, 0.0); 8];
        h[0] = C64::new(1.0, 0.0);
        let out = circular_convolve(&h, &s).unwrap();
        out.iter().zip(&s).for_each(|(a, b)| assert!((a - b).norm() < 1e-12));
        h[0] = C64::new(0.0, 0.0);
        h[1] = C64::new(1.0, 0.0);
        let out = circular_convolve(&h, &s).unwrap();
        for i in 0..8 {
            assert!((out[i] - s[(i + 7) % 8]).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_circulant_oracle() {
        let mut r = rng::trial_stream(5, 0);
        for n in [8, 17, 64] {
            let h = random_vec(n, &mut r);
            let s = random_vec(n, &mut r);
            let fast = circular_convolve(&h, &s).unwrap();
            let slow = circulant_oracle(&h, &s);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn convolution_rejects_length_mismatch() {
        let a = vec![C64::new(1.0, 0.0); 4];
        let b = vec![C64::new(1.0, 0.0); 5];
        assert!(matches!(circular_convolve(&a, &b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn silent_frame_without_noise_is_zero() {
        let mut c = small_cfg();
        c.k2 = 0;
        let s = Scenario::new(&c).unwrap();
        let f = generate_frame(&s, 0);
        assert!(f.signals.y_hat.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn identity_channel_passes_pilot_and_payload() {
        let c = small_cfg();
        let s = Scenario::new(&c).unwrap();
        let act = ActivityPattern { active: vec![1] };
        let ch = ChannelProfile::from_taps(
            c.t_cp,
            vec![
                vec![],
                vec![Tap {
                    delay: 0,
                    gain: C64::new(1.0, 0.0),
                }],
                vec![],
                vec![],
            ],
        )
        .unwrap();
        let payloads = draw_payloads(&c, &act, &mut rng::trial_stream(0, 0));
        let sig = transmit_receive(&s, payloads.clone(), &ch, &mut rng::trial_stream(0, 1));
        let mut expected = s.pilots.spectrum(1);
        for (&f, &x) in s.slots.payload_subcarriers(1).iter().zip(&payloads[0].symbols) {
            expected[f] += x;
        }
        for (a, b) in sig.y_hat.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    fn time_domain_oracle(s: &Scenario, f: &Frame) -> Vec<C64> {
        let n = s.cfg.n;
        let mut y = vec![C64::new(0.0, 0.0); n];
        for &u in &f.activity.active {
            let mut tx = s.pilots.spectrum(u);
            let p = f.signals.payloads.iter().find(|p| p.user == u).unwrap();
            for (&k, &x) in s.slots.payload_subcarriers(u).iter().zip(&p.symbols) {
                tx[k] += x;
            }
            s.dft.inverse(&mut tx);
            let out = circular_convolve(&f.channels.padded(u, n), &tx).unwrap();
            y.iter_mut().zip(out).for_each(|(a, b)| *a += b);
        }
        let mut e = f.signals.noise_hat.clone();
        s.dft.inverse(&mut e);
        y.iter_mut().zip(e).for_each(|(a, b)| *a += b);
        s.dft.forward(&mut y);
        y
    }

    #[test]
    fn frequency_path_matches_time_domain_path() {
        let mut c = small_cfg();
        c.sigma2 = 0.1;
        for mode in [SensingMode::Plain, SensingMode::Randomized] {
            c.sensing_mode = mode;
            let s = Scenario::new(&c).unwrap();
            for trial in 0..5 {
                let f = generate_frame(&s, trial);
                let oracle = time_domain_oracle(&s, &f);
                for (a, b) in f.signals.y_hat.iter().zip(&oracle) {
                    assert!((a - b).norm() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn randomized_window_applies_time_domain_multipliers() {
        let mut c = small_cfg();
        c.sensing_mode = SensingMode::Randomized;
        c.sigma2 = 0.05;
        let s = Scenario::new(&c).unwrap();
        let f = generate_frame(&s, 2);
        let mut t = f.signals.y_hat.clone();
        s.dft.inverse(&mut t);
        let mult = s.multipliers.as_ref().unwrap();
        t.iter_mut().zip(mult).for_each(|(a, m)| *a *= m);
        s.dft.forward(&mut t);
        for (i, &k) in s.pilots.window().iter().enumerate() {
            assert!((f.signals.y_window[i] - t[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn power_accounting_with_unit_taps() {
        let mut c = small_cfg();
        c.n = 1024;
        c.m = 128;
        c.u_max = 1;
        c.k1 = 1;
        c.k2 = 1;
        c.b_slots = 1;
        c.bits_per_user = 800;
        c.alpha = 0.3;
        let s = Scenario::new(&c).unwrap();
        let act = ActivityPattern { active: vec![0] };
        let ch = ChannelProfile::from_taps(
            c.t_cp,
            vec![vec![Tap {
                delay: 0,
                gain: C64::new(1.0, 0.0),
            }]],
        )
        .unwrap();
        let (mut ctrl, mut data, mut nd) = (0.0, 0.0, 0usize);
        let frames = 1000;
        for t in 0..frames {
            let mut r = rng::trial_stream(9, t);
            let pl = draw_payloads(&c, &act, &mut r);
            let sig = transmit_receive(&s, pl, &ch, &mut r);
            ctrl += norm_sqr(&sig.y_window) / c.m as f64;
            for &k in s.slots.payload_subcarriers(0) {
                data += sig.y_hat[k].norm_sqr();
                nd += 1;
            }
        }
        let ctrl = ctrl / frames as f64;
        let data = data / nd as f64;
        assert!((ctrl - 0.3).abs() <= 0.02 * 0.3, "{ctrl}");
        assert!((data - 0.7).abs() <= 0.02 * 0.7, "{data}");
    }

    #[test]
    fn frames_are_deterministic() {
        let mut c = small_cfg();
        c.sigma2 = 0.2;
        let s = Scenario::new(&c).unwrap();
        let a = generate_frame(&s, 7);
        let b = generate_frame(&s, 7);
        assert_eq!(a.signals.y_hat, b.signals.y_hat);
        assert_eq!(a.signals.y_window, b.signals.y_window);
        assert_eq!(a.signals.payloads, b.signals.payloads);
    }

    #[test]
    fn payloads_stay_in_their_slot_and_off_the_window() {
        let c = SystemConfig::profile(Profile::Desk);
        let s = Scenario::new(&c).unwrap();
        let mut used = std::collections::HashSet::new();
        for u in 0..c.u_max {
            for &k in s.slots.payload_subcarriers(u) {
                assert!(!s.pilots.window().contains(&k));
                assert!(used.insert(k), "slots overlap");
            }
        }
    }

    #[test]
    fn modulation_round_trip() {
        let bits = vec![0, 1, 1, 0, 1, 1, 0, 0];
        for m in [Modulation::Bpsk, Modulation::Qpsk] {
            let s = modulate(&bits, m);
            assert!(s.iter().all(|v| (v.norm_sqr() - 1.0).abs() < 1e-12));
            assert_eq!(demodulate(&s, m), bits);
        }
    }
}
