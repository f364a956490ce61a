use crate::error::{Error, Result};
use crate::fft::Dft;
use crate::model::{PilotBook, Scenario};
use crate::C64;

use super::LinearOperator;

/// How a block of the compound vector is mapped to the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Per block: direct sums when the block is sparse enough, FFT otherwise.
    #[default]
    Auto,
    /// Always one length-`n` FFT per nonzero block.
    Fft,
    /// Always direct twiddle sums over the window.
    Direct,
}

/// Matrix-free `A = Phi_B D(p)` acting on compound channel vectors of length
/// `users * t_cp`.
///
/// In plain mode column `(u, t)` evaluated at window row `f` is
/// `p_u(f) e^{-i 2 pi f t / n}`. In randomized mode the plain output is further
/// mixed by `K = P_B W diag(mult) W* P_B^T`.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    n: usize,
    t_cp: usize,
    window: Vec<usize>,
    pilots: Vec<Vec<C64>>,
    multipliers: Option<Vec<C64>>,
    /// `twiddle[j] = e^{-i 2 pi j / n}`.
    twiddle: Vec<C64>,
    dft: Dft,
    strategy: Strategy,
}

impl SensingOperator {
    pub fn new(pilots: &PilotBook, t_cp: usize, multipliers: Option<&[C64]>) -> Result<Self> {
        let n = pilots.n();
        if t_cp == 0 || t_cp > n {
            return Err(Error::Domain(format!("t_cp = {t_cp} outside [1, {n}]")));
        }
        let multipliers = match multipliers {
            Some(m) if m.len() != n => {
                return Err(Error::Dimension {
                    expected: n,
                    got: m.len(),
                })
            }
            // All-ones multipliers are the plain operator.
            Some(m) if m.iter().all(|v| *v == C64::new(1.0, 0.0)) => None,
            Some(m) => Some(m.to_vec()),
            None => None,
        };
        let twiddle = (0..n)
            .map(|j| C64::from_polar(1.0, -std::f64::consts::TAU * j as f64 / n as f64))
            .collect();
        Ok(Self {
            n,
            t_cp,
            window: pilots.window().to_vec(),
            pilots: (0..pilots.users()).map(|u| pilots.values(u).to_vec()).collect(),
            multipliers,
            twiddle,
            dft: Dft::new(n),
            strategy: Strategy::Auto,
        })
    }

    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        Self::new(&s.pilots, s.cfg.t_cp, s.multipliers.as_deref())
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn users(&self) -> usize {
        self.pilots.len()
    }

    pub fn t_cp(&self) -> usize {
        self.t_cp
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn is_randomized(&self) -> bool {
        self.multipliers.is_some()
    }

    fn fft_cost(&self) -> usize {
        self.n * (usize::BITS - self.n.leading_zeros()) as usize
    }

    fn use_direct(&self, work: usize) -> bool {
        match self.strategy {
            Strategy::Auto => work <= self.fft_cost(),
            Strategy::Fft => false,
            Strategy::Direct => true,
        }
    }

    #[inline]
    fn phase(&self, f: usize, t: usize) -> C64 {
        self.twiddle[(f * t) % self.n]
    }

    /// Plain-mode forward map, accumulating into `y`.
    fn apply_plain(&self, x: &[C64], y: &mut [C64]) {
        let m = self.window.len();
        let mut buf = Vec::new();
        for (u, hu) in x.chunks(self.t_cp).enumerate() {
            let taps: Vec<(usize, C64)> = hu
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != C64::new(0.0, 0.0))
                .map(|(t, v)| (t, *v))
                .collect();
            if taps.is_empty() {
                continue;
            }
            let p = &self.pilots[u];
            if self.use_direct(taps.len() * m) {
                for (i, &f) in self.window.iter().enumerate() {
                    let g: C64 = taps.iter().map(|&(t, v)| v * self.phase(f, t)).sum();
                    y[i] += p[i] * g;
                }
            } else {
                buf.clear();
                buf.resize(self.n, C64::new(0.0, 0.0));
                buf[..self.t_cp].copy_from_slice(hu);
                self.dft.raw_forward(&mut buf);
                for (i, &f) in self.window.iter().enumerate() {
                    y[i] += p[i] * buf[f];
                }
            }
        }
    }

    /// Plain-mode adjoint.
    fn adjoint_plain(&self, y: &[C64]) -> Vec<C64> {
        let m = self.window.len();
        let mut x = vec![C64::new(0.0, 0.0); self.users() * self.t_cp];
        let direct = self.use_direct(m * self.t_cp);
        let mut buf = Vec::new();
        for (u, p) in self.pilots.iter().enumerate() {
            let z: Vec<C64> = p.iter().zip(y).map(|(pi, yi)| pi.conj() * yi).collect();
            let xu = &mut x[u * self.t_cp..(u + 1) * self.t_cp];
            if direct {
                for (t, out) in xu.iter_mut().enumerate() {
                    *out = self
                        .window
                        .iter()
                        .zip(&z)
                        .map(|(&f, zi)| zi * self.phase(f, t).conj())
                        .sum();
                }
            } else {
                buf.clear();
                buf.resize(self.n, C64::new(0.0, 0.0));
                for (&f, zi) in self.window.iter().zip(&z) {
                    buf[f] = *zi;
                }
                self.dft.raw_inverse(&mut buf);
                xu.copy_from_slice(&buf[..self.t_cp]);
            }
        }
        x
    }

    /// `K v` (or `K* v` when `adjoint`) for window vectors `v`.
    fn mix(&self, v: &mut [C64], adjoint: bool) {
        let Some(mult) = &self.multipliers else {
            return;
        };
        let mut full = vec![C64::new(0.0, 0.0); self.n];
        for (&f, vi) in self.window.iter().zip(v.iter()) {
            full[f] = *vi;
        }
        self.dft.inverse(&mut full);
        for (a, m) in full.iter_mut().zip(mult) {
            *a *= if adjoint { m.conj() } else { *m };
        }
        self.dft.forward(&mut full);
        for (&f, vi) in self.window.iter().zip(v.iter_mut()) {
            *vi = full[f];
        }
    }
}

impl LinearOperator for SensingOperator {
    fn rows(&self) -> usize {
        self.window.len()
    }

    fn cols(&self) -> usize {
        self.users() * self.t_cp
    }

    fn block_len(&self) -> usize {
        self.t_cp
    }

    fn apply_unchecked(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows()];
        self.apply_plain(x, &mut y);
        self.mix(&mut y, false);
        y
    }

    fn adjoint_unchecked(&self, y: &[C64]) -> Vec<C64> {
        let mut v = y.to_vec();
        self.mix(&mut v, true);
        self.adjoint_plain(&v)
    }

    fn column(&self, j: usize) -> Vec<C64> {
        let (u, t) = (j / self.t_cp, j % self.t_cp);
        let mut c: Vec<C64> = self
            .window
            .iter()
            .zip(&self.pilots[u])
            .map(|(&f, p)| p * self.phase(f, t))
            .collect();
        self.mix(&mut c, false);
        c
    }
}
